from ...utils.lazyloading import lazy_wrapper

# Lazy Module Loading ------------------------------------------------------------------------------

@lazy_wrapper
def Ensemble(): # type: ignore
    from .ensemble_module import Ensemble
    return Ensemble

@lazy_wrapper
def Model(): # type: ignore
    from .model_module import Model
    return Model

@lazy_wrapper
def Rng(): # type: ignore
    from .rng_module import Rng
    return Rng

@lazy_wrapper
def Runtime(): # type: ignore
    from .runtime_module import Runtime
    return Runtime

@lazy_wrapper
def Wandb(): # type: ignore
    from .wandb_module import Wandb
    return Wandb
