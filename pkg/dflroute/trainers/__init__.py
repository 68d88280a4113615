import importlib

from .base_trainer import BaseTrainer, NonFiniteError


TRAINER_REGISTRY = {}


def register_trainer(name):
    """
    New trainer types can be added to dflroute with the :func:`register_trainer`
    function decorator.

    For example::

        @register_trainer('dfl')
        class DFLTrainer(BaseTrainer):
            (...)

    Args:
        name (str): the name of the trainer
    """

    def register_trainer_cls(cls):
        if name in TRAINER_REGISTRY:
            raise ValueError("Cannot register duplicate trainer ({})".format(name))
        if not issubclass(cls, BaseTrainer):
            raise ValueError("Trainer ({}: {}) must extend BaseTrainer".format(name, cls.__name__))
        TRAINER_REGISTRY[name] = cls
        cls.trainer_name = name
        return cls

    return register_trainer_cls


def try_import_trainer(trainer):
    if trainer not in TRAINER_REGISTRY:
        if trainer in SUPPORTED_TRAINERS:
            importlib.import_module(SUPPORTED_TRAINERS[trainer])
        else:
            return False
    return True


def build_trainer(args):
    if not try_import_trainer(args.trainer):
        raise KeyError(f"Unknown trainer ({args.trainer})")
    return TRAINER_REGISTRY[args.trainer].build_trainer_from_args(args)


SUPPORTED_TRAINERS = {
    "dfl": "dflroute.trainers.dfl_trainer",
    "p2p": "dflroute.trainers.p2p_trainer",
}
