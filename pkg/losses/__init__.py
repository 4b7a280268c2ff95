from .loss_types import AblationFlags, Batch, LossReport, LossWeights
from .prototype_losses import dce_loss, l_f, l_faem, l_fb, smooth_norm_loss
from .orthogonal_losses import PenaltyEntry, l_orth, l_pb, penalty_set
from .total_loss import total_loss
