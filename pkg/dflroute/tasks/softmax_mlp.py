import argparse

from . import BaseTask, register_task


@register_task("softmax_mlp")
class SoftmaxMLP(BaseTask):
    """Gaussian-mixture classification with a bias-free MLP and softmax cross entropy."""

    default_dataset = "gaussian_mixture"
    default_model = "mlp"

    @staticmethod
    def add_args(parser: argparse.ArgumentParser):
        """Add task-specific arguments to the parser."""
        BaseTask.add_args(parser)
