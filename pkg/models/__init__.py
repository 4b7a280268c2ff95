from .encoder import Encoder, EncoderConfig
from .dual_branch_model import (
    Branch,
    DualBranchModel,
    center_prototype,
    encode,
    generalized_distance,
    init_model,
    similarity_matrix,
)
