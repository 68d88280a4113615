import torch.nn as nn

from .. import BaseModel, register_model


@register_model("linear")
class Linear(BaseModel):
    """Single bias-free linear map from features to regression outputs."""

    @staticmethod
    def add_args(parser):
        """Add model-specific arguments to the parser."""
        # fmt: off
        parser.add_argument("--num-features", type=int)
        parser.add_argument("--num-classes", type=int, default=1)
        # fmt: on

    @classmethod
    def build_model_from_args(cls, args):
        return cls(args.num_features, getattr(args, "num_classes", 1))

    def __init__(self, in_feats, out_feats=1):
        super(Linear, self).__init__()
        self.fc = nn.Linear(in_feats, out_feats, bias=False)

    def weight_layers(self):
        return [self.fc]

    def forward(self, x, *args, **kwargs):
        return self.fc(x)
