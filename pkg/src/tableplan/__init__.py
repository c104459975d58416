"""Pick-n-place rearrangement planning for heterogeneous objects on a bounded
2D tabletop: problem model, weighted dependency-graph planners, Monte Carlo
tree search, and a benchmark harness."""

from .geometry import (Footprint, Pose, Workspace, collide, collision_probability,
                       in_workspace, minkowski_area, transform)
from .weighting import ObjectCharacteristics, hecp_weights, heti_weights
from .instance import (PP, TI, Action, FormatError, GenerationError, Instance,
                       RearrangementPlan, density, gen_rand, gen_sq, instance_from_json,
                       instance_to_json, is_feasible, load_instance, load_plan,
                       plan_cost, plan_from_json, plan_to_json, save_instance,
                       save_plan, validate_plan)
from .depgraph import DependencyGraph, build, min_weight_fvs, scc, to_dot
from .trlb import (PartialPlan, PlanResult, PrimitiveAction, PrimitivePlan,
                   allocate_buffers, plan, primitive_plan_erbm, primitive_plan_etbm)
from .mcts import MCTSConfig, SearchNode, SearchResult, legal_actions, reward, search, ucb_select
from .bench import run_planner, run_suite, suite_to_csv
from .render import render, scene_svg

__version__ = "0.1.0"
