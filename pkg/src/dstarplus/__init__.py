"""Risk-aware incremental grid path planning (D* lite with unknown-space and
obstacle-proximity costs on an expandable voxel map)."""
from .grid import (
    Bounds,
    ChangeRecord,
    GridMeta,
    VoxelGrid,
    VoxelState,
    index_to_world,
    neighbors,
    world_to_index,
)
from .planner import (
    GoalOccupiedError,
    Path,
    PlannerCore,
    PlannerError,
    StartOccupiedError,
    edge_cost,
    heuristic,
    plan,
)
from .riskfield import CostConfig, CostField

__version__ = "0.1.0"
