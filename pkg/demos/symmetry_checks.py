"""Invariance checks on the bundled case studies.

Walks the three operator families: point symmetries of a first-order
potential system, a conditional symmetry of a promoted wave system, and
higher-order symmetries of a second-order ordinary constraint.  Each
check prolongs the operator, restricts to the solution manifold, and
zero-tests the residual.
"""

from importlib import resources

from symred.checks import check_classical, check_conditional, check_lie_backlund
from symred.problems import parse_problem


def load(name):
    text = (resources.files("symred") / "data" / f"{name}.prob").read_text()
    return parse_problem(text, name=name)


def show(label, rep):
    print(f"  {label:28s} -> {rep.verdict}  (seed={rep.seed}, "
          f"tol_abs={rep.tol_abs:g})")
    if rep.witness:
        print(f"    witness point: {rep.witness}")


def main():
    eq3 = load("eq3")
    sys3 = eq3.equations["sys3"]
    print("point symmetries of the potential system")
    for name in ("D", "Q", "halfQminusD"):
        show(name, check_classical(eq3.operators[name].operator, sys3))

    sg = load("sg_deformed")
    sys89 = sg.equations["sys89"]
    print("conditional symmetry of the promoted wave system")
    show("Qcond", check_conditional(sg.operators["Qcond"].operator, sys89))
    # the perturbed component k*cos(x3) + 1 breaks invariance and the
    # check hands back a concrete refuting sample point
    show("QcondPerturbed",
         check_conditional(sg.operators["QcondPerturbed"].operator, sys89))

    ode = load("ode32")
    target = ode.equations["ode32"]
    print("higher symmetries of u'' = -u'^2 in canonical form")
    for name in ("Q1", "Q2", "Qmutant"):
        show(name, check_lie_backlund(ode.operators[name].operator, target))


if __name__ == "__main__":
    main()
