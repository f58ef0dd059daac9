"""Model hyperparameters."""

from dataclasses import asdict, dataclass
from typing import Any, Dict

from ..exceptions import InputError
from ..utils.validation import (
    validate_choice,
    validate_positive_integer,
    validate_probability,
)

VARIANTS = ('gcn', 'gat', 'hybrid')
READOUTS = ('mean', 'max')


@dataclass
class ModelConfig:
    """Architecture of one of the three model variants.

    Layer counts are fixed at two per stack; ``gat_layers`` is ignored by the
    ``gcn`` variant and ``gcn_layers`` by the ``gat`` variant.
    """
    variant: str = 'hybrid'
    num_classes: int = 2
    hidden_dim: int = 512
    gcn_layers: int = 2
    gat_layers: int = 2
    heads: int = 2
    input_dim: int = 3
    edge_aug_p: float = 0.5
    negative_slope: float = 0.2
    readout: str = 'mean'

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        validate_choice(self.variant, VARIANTS, "variant")
        validate_choice(self.readout, READOUTS, "readout")
        validate_positive_integer(self.num_classes, "num_classes", min_value=2)
        validate_positive_integer(self.hidden_dim, "hidden_dim")
        validate_positive_integer(self.input_dim, "input_dim")
        validate_positive_integer(self.heads, "heads")
        validate_probability(self.edge_aug_p, "edge_aug_p")
        if self.negative_slope < 0:
            raise InputError(f"negative_slope must be >= 0, got {self.negative_slope}")
        for name in ('gcn_layers', 'gat_layers'):
            if getattr(self, name) != 2:
                raise InputError(f"{name} must be 2, got {getattr(self, name)}")
        if self.uses_gat and self.hidden_dim % self.heads != 0:
            raise InputError(f"hidden_dim ({self.hidden_dim}) must be divisible by "
                             f"heads ({self.heads})")

    @property
    def uses_gcn(self) -> bool:
        return self.variant in ('gcn', 'hybrid')

    @property
    def uses_gat(self) -> bool:
        return self.variant in ('gat', 'hybrid')

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown model config keys: {', '.join(sorted(unknown))}")
        return cls(**data)
