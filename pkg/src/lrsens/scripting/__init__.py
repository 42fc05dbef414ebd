from .context import ArgumentParser, context, Context, ContextModule, execute, Job, State

# Module Imports -----------------------------------------------------------------------------------

from . import module
