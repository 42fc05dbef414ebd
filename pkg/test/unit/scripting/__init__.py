from . import context_test, wandb_module_test
