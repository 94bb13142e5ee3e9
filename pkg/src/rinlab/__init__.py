"""rinlab: interactive residue interaction network exploration.

Parse MD trajectories, build RINs under tunable distance cutoffs, compute
centralities/communities, lay graphs out in 3D, and serve live exploration
sessions to a browser UI.
"""
from .analytics import (
    ClosenessVariant,
    CommunityMethod,
    Measure,
    NodeScores,
    Partition,
    betweenness,
    closeness,
    community_detect,
    degree,
    modularity,
    nmi,
    pagerank,
    score_delta,
)
from .layout import Layout3D, LayoutKind, LayoutParams, maxent_stress_layout, protein_layout, stress_energy
from .rin import (
    DistanceCriterion,
    EdgeDelta,
    Rin,
    RinConfig,
    apply_cutoff_change,
    apply_frame_change,
    build_rin,
    connected_components,
    residue_distance,
)
from .trajectory import (
    Atom,
    Frame,
    Residue,
    Topology,
    Trajectory,
    export_traj_json,
    parse_pdb,
    parse_traj_json,
    select_protein_residues,
)

__version__ = "0.1.0"
