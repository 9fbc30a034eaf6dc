"""Fair load allocation on bipartite task/worker graphs.

Exact rational LPs for the min-max, max-min and min-spread objectives,
spanning-tree equalization for increasing-bijection load functions, integer
enumeration, and seeded checkers for the relations between the objectives.
"""

from importlib import resources

__version__ = "0.1.0"

from .errors import FairloadError  # noqa: E402
from .expr import (Max, OddPow, Shift, Sum, Var, eval_expr, g_map, invert_component,  # noqa: E402
                   linear)
from .instance import (Assignment, BipartiteInstance, LoadReport, Mode, NumericKind,  # noqa: E402
                       check_membership, evaluate_loads, instance_from_json, instance_to_json,
                       validate_instance)
from .lp import (equal_load_feasible, max_load_of_worker_given_spread,  # noqa: E402
                 min_load_of_worker_given_spread, solve_max_lmin, solve_min_lmax, solve_min_spread)
from .tree import equalize_connected, equalize_tree, fix_loads, fixed_point_bisect  # noqa: E402
from .integral import (enumerate_integral, integral_min_lmax, integral_min_spread,  # noqa: E402
                       integral_pareto)
from .generate import GenParams, gen_random_instance  # noqa: E402
from .verify import (TheoremReport, Verdict, check_prop1, check_theorem1, check_theorem2,  # noqa: E402
                     improvement_step, interpolate_umax)


def fixture_path(name: str) -> str:
    """Path of a bundled fixture such as ``"fig1.json"``."""
    return str(resources.files(__name__).joinpath("fixtures", name))


def load_fixture(name: str) -> BipartiteInstance:
    import json

    with open(fixture_path(name), encoding="utf-8") as fh:
        return instance_from_json(json.load(fh))
