import errno
import hashlib
import itertools
import logging
import os
import os.path as osp
import random

import numpy as np
import torch
import torch.nn.functional as F


class ArgClass(object):
    def __init__(self):
        pass

    def __repr__(self):
        items = ", ".join(f"{key}={value!r}" for key, value in sorted(self.__dict__.items()))
        return f"Args({items})"


def build_args_from_dict(dic):
    args = ArgClass()
    for key, value in dic.items():
        args.__setattr__(key, value)
    return args


def makedirs(path):
    try:
        os.makedirs(osp.expanduser(osp.normpath(path)))
    except OSError as e:
        if e.errno != errno.EEXIST and osp.isdir(path):
            raise e


def set_logger(level=logging.INFO, log_file=None):
    """Configure console (and optional file) logging once per process."""
    handlers = [logging.StreamHandler()]
    if log_file is not None:
        handlers.append(logging.FileHandler(log_file, mode="w"))
    logging.basicConfig(
        format="%(asctime)s %(levelname)-8s %(message)s",
        level=level,
        datefmt="%Y-%m-%d %H:%M:%S",
        handlers=handlers,
        force=True,
    )


def get_activation(act: str):
    if act == "relu":
        return F.relu
    elif act == "sigmoid":
        return torch.sigmoid
    elif act == "tanh":
        return torch.tanh
    elif act == "gelu":
        return F.gelu
    elif act == "identity":
        return lambda x: x
    else:
        return F.relu


def derive_seed(seed, *keys):
    """Stable 63-bit seed for a (seed, round, client, ...) tuple."""
    text = ":".join(str(x) for x in (seed,) + keys)
    digest = hashlib.sha256(text.encode("utf8")).digest()
    return int.from_bytes(digest[:8], "little") & ((1 << 63) - 1)


def tabulate_results(results_dict):
    # Average for different seeds
    tab_data = []
    for variant in results_dict:
        results = np.array([list(res.values()) for res in results_dict[variant]], dtype=np.float64)
        tab_data.append(
            [variant]
            + list(
                itertools.starmap(
                    lambda x, y: f"{x:.4f}±{y:.4f}",
                    zip(
                        np.mean(results, axis=0).tolist(),
                        np.std(results, axis=0).tolist(),
                    ),
                )
            )
        )
    return tab_data


def set_random_seed(seed):
    random.seed(seed)
    np.random.seed(seed % (2 ** 32))
    torch.manual_seed(seed)
