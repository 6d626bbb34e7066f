#include <stdexcept>

#include "causal_pareto/scm.hpp"

namespace cpareto {

namespace {

const std::string kSynthetic1 = R"(# synthetic-1 benchmark.
# Stand-in structural equations: the graph topology (four treatments feeding
# two targets through X1 and X2, no confounders), the interventional domains
# and the standard-normal exogenous variables are fixed by the benchmark.
# The coefficients are project-chosen stand-ins that keep the two targets in
# conflict over (X1, X2) while X3 and X4 act only through them.
[variables]
X1 treatment
X2 treatment
X3 treatment
X4 treatment
Y1 target
Y2 target

[edges]
X3 -> X1
X4 -> X2
X1 -> Y1
X2 -> Y1
X1 -> Y2
X2 -> Y2

[equations]
X1 = 0.5*X3 + UX1
X2 = 0.5*X4 + UX2
X3 = UX3
X4 = UX4
Y1 = X1^2 + X2^2 + 0.1*UY1
Y2 = (X1 - 2)^2 + (X2 - 2)^2 + 0.1*UY2

[exogenous]
UX1 ~ gaussian(0, 1)
UX2 ~ gaussian(0, 1)
UX3 ~ gaussian(0, 1)
UX4 ~ gaussian(0, 1)
UY1 ~ gaussian(0, 1)
UY2 ~ gaussian(0, 1)

[domains]
X1 in [-1, 2]
X2 in [-1, 2]
X3 in [-1, 1]
X4 in [-1, 1]
)";

const std::string kSynthetic2 = R"(# synthetic-2 benchmark.
# Stand-in structural equations: the graph topology (confounder U between X4
# and Y1, causal path X4 -> X1 -> Y1), the interventional domains, Gaussian
# treatment/target noise and the confounder term -X1*X2*U/2 in the equation
# of Y1 are fixed by the benchmark; the remaining coefficients are
# project-chosen stand-ins. Leaving X1 un-intervened keeps X1 aligned with U
# through X4, so the confounder term stays negative for X2 >= 0, which is
# what makes intervening on {X2, X3} strictly better than any intervention
# that clamps X1.
# Note: the benchmark statement gives D(X_i) = [0, 5] "for i = 1, 2" after
# already fixing D(X1) = [-2, 5]; the ranges below apply [0, 5] to X2 and X3.
[variables]
X1 treatment
X2 treatment
X3 treatment
X4 treatment
Y1 target
Y2 target

[edges]
X4 -> X1
X1 -> Y1
X2 -> Y1
X2 -> Y2
X3 -> Y2
X4 <-> Y1

[equations]
X1 = X4 + 0.5*UX1
X2 = UX2
X3 = UX3
X4 = 2*U + 0.5*UX4
Y1 = 0.25*X1^2 + (X2 - 2)^2 - X1*X2*U/2 + UY1
Y2 = 0.5*(X2 - 5)^2 + X3^2 + UY2

[exogenous]
U ~ bernoulli(0.5, -1, 1)
UX1 ~ gaussian(0, 1)
UX2 ~ gaussian(0, 1)
UX3 ~ gaussian(0, 1)
UX4 ~ gaussian(0, 1)
UY1 ~ gaussian(0, 1)
UY2 ~ gaussian(0, 1)

[domains]
X1 in [-2, 5]
X2 in [0, 5]
X3 in [0, 5]
X4 in [-4, 5]
)";

const std::string kHealth = R"(# health benchmark.
# Stand-in structural equations: the treatments (BMI, Weight, CI, Aspirin),
# the targets (Statin, PSA), the non-manipulative Age with U_age ~ N(65, 1)
# and the interventional domains are fixed by the benchmark; the equations
# are project-chosen stand-ins consistent with its causal structure (statin
# prescription rising with age and BMI, PSA lowered by statins and BMI and
# raised by aspirin). Coefficient-exact reproduction is not attempted.
[variables]
Age nonmanipulative
Aspirin treatment
BMI treatment
CI treatment
PSA target
Statin target
Weight treatment

[edges]
Age -> Statin
Age -> PSA
CI -> Weight
Weight -> BMI
BMI -> Statin
BMI -> PSA
Aspirin -> PSA
Statin -> PSA

[equations]
Age = UAge
CI = UCI
Weight = 68 + 0.1*CI + 4*UW
BMI = 0.09*Weight + 17 + UB
Aspirin = UAsp
Statin = 1/(1 + exp(13 - 0.1*Age - 0.2*BMI))
PSA = 6.8 + 0.04*Age - 0.15*BMI - 2*Statin + 0.55*Aspirin + 0.4*UPSA

[exogenous]
UAge ~ gaussian(65, 1)
UAsp ~ uniform(0, 1)
UB ~ tgaussian(0, 1, -1, 1)
UCI ~ uniform(-100, 100)
UPSA ~ gaussian(0, 1)
UW ~ tgaussian(0, 1, -2, 2)

[domains]
Aspirin in [0, 1]
BMI in [20, 30]
CI in [-100, 100]
Weight in [50, 100]
)";

}  // namespace

std::vector<std::string> builtin_problem_names() { return {"synthetic1", "synthetic2", "health"}; }

const std::string& builtin_spec_text(const std::string& name) {
    if (name == "synthetic1" || name == "synthetic-1") return kSynthetic1;
    if (name == "synthetic2" || name == "synthetic-2") return kSynthetic2;
    if (name == "health") return kHealth;
    throw ScmError("unknown problem '" + name + "' (valid: synthetic1, synthetic2, health)");
}

ScmSpec builtin_problem(const std::string& name) { return parse_scm(builtin_spec_text(name)); }

}  // namespace cpareto
