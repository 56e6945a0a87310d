"""boxfix: fixed points of multivalued maps on boxes via orthant labeling."""

from .geometry import (
    BoxDomain,
    Cell,
    Face,
    GridSpec,
    all_labels,
    carrier,
    cell_box,
    cell_faces,
    cell_vertices,
    corner_label,
    face_box,
    face_vertices,
    index_label,
    label_index,
    sign_of,
)
from .correspondences import (
    ConvexImage,
    Correspondence,
    EvaluationError,
    LgdpReport,
    MapSpec,
    MapSpecError,
    SeparationCertificate,
    best_response_correspondence,
    bimatrix_map_spec,
    build_correspondence,
    distance_to_hull,
    evaluate,
    image_hull_over_box,
    lgdp_sample_check,
    load_map_spec,
    representative,
    residual,
    separating_hyperplane,
)
from .dcn import (
    DcnResult,
    brute_force_is_dcn,
    dcn_extension,
    face_safe,
    is_affinely_separable,
    is_dcn,
    subcube,
)
from .labeling import (
    GridLabeling,
    LabelingConfig,
    LabelingError,
    VertexLabel,
    admissible_labels,
    choose_label,
    dump_grid_csv,
    label_grid,
)
from .degree import (
    DegreeResult,
    LabeledTriangulation,
    boundary_degree_2d,
    boundary_label_cycle,
    completely_labeled_cells,
    completely_labeled_triangles,
    fan_triangulation,
    inward_labeling_degree,
    nondegenerate_valid,
    random_sperner_triangulation,
    sperner_valid,
    triangle_grid_triangulation,
)
from .solver import (
    Candidate,
    SolveReport,
    SolverAbort,
    SolverConfig,
    filter_spurious,
    refine,
    scan,
    solve,
)

__version__ = "0.1.0"
