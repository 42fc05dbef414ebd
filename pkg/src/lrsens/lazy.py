"""
Optional or presentation-only dependencies, imported on first use.
"""
from .utils.lazyloading import lazy_wrapper

@lazy_wrapper
def tqdm():
    del globals()["tqdm"]
    from tqdm import tqdm
    globals()["tqdm"] = tqdm
    return tqdm


@lazy_wrapper
def wandb():
    del globals()["wandb"]
    import wandb
    globals()["wandb"] = wandb
    return wandb
