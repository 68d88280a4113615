import importlib

from dflroute.data import FederatedDataset


DATASET_REGISTRY = {}


def register_dataset(name):
    """
    New dataset types can be added to dflroute with the :func:`register_dataset`
    function decorator.

    For example::

        @register_dataset('my_dataset')
        class MyDataset(FederatedDataset):
            (...)

    Args:
        name (str): the name of the dataset
    """

    def register_dataset_cls(cls):
        if name in DATASET_REGISTRY:
            raise ValueError("Cannot register duplicate dataset ({})".format(name))
        if not issubclass(cls, FederatedDataset):
            raise ValueError("Dataset ({}: {}) must extend dflroute.data.FederatedDataset".format(name, cls.__name__))
        DATASET_REGISTRY[name] = cls
        return cls

    return register_dataset_cls


def try_import_dataset(dataset):
    if dataset not in DATASET_REGISTRY:
        if dataset in SUPPORTED_DATASETS:
            importlib.import_module(SUPPORTED_DATASETS[dataset])
        else:
            return False
    return True


def build_dataset(args):
    if not try_import_dataset(args.dataset):
        raise KeyError(f"Unknown dataset ({args.dataset})")
    return DATASET_REGISTRY[args.dataset].build_dataset_from_args(args)


SUPPORTED_DATASETS = {
    "gaussian_regression": "dflroute.datasets.synthetic",
    "gaussian_mixture": "dflroute.datasets.synthetic",
}
