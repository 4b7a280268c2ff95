from .tensor import Tensor, backward
from .gradcheck import grad_check
from . import functional

__all__ = ['Tensor', 'backward', 'grad_check', 'functional']
