"""Parameter initialisation and the dense layer shared by every branch."""

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor, add, matmul


def uniform(rng, shape, fan_in, name=None):
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) parameter tensor."""
    bound = 1.0 / np.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True, name=name)


@dataclass
class Dense:
    weight: Tensor
    bias: Tensor

    @classmethod
    def init(cls, rng, d_in, d_out, name="dense"):
        return cls(uniform(rng, (d_in, d_out), d_in, f"{name}.weight"),
                   uniform(rng, (d_out,), d_in, f"{name}.bias"))

    @property
    def d_in(self):
        return self.weight.shape[0]

    @property
    def d_out(self):
        return self.weight.shape[1]

    def tensors(self):
        return [self.weight, self.bias]

    def __call__(self, x):
        return add(matmul(x, self.weight), self.bias)
