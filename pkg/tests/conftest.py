from importlib import resources

import pytest

from symred.problems import parse_problem


def load_bundle(name: str):
    text = (resources.files("symred") / "data" / f"{name}.prob").read_text(
        encoding="utf-8")
    return parse_problem(text, name=name)


@pytest.fixture(scope="session")
def bundles():
    names = ("eq2", "eq3", "eq4", "eq6", "ode32", "sg_deformed")
    return {n: load_bundle(n) for n in names}
