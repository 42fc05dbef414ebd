"""
Deferred imports. The wandb client and the context modules are only loaded once a command touches
them, which keeps `lrsens --version` and the numerical core free of those imports.
"""
import threading
from typing import Any, Callable, cast, Generic, List, Optional, TypeVar

T = TypeVar("T")

class LazyWrapper(Generic[T]):
    """
    Stand-in for an object that is created by `factory` on first access.
    """
    def __init__(self, name: str, factory: Callable[[], T]):
        self.__name = name
        self.__factory = factory
        self.__wrapped_object: Optional[T] = None
        self.__loaded = False
        # Contexts run their jobs on worker threads.
        self.__lock = threading.Lock()

    @property
    def __is_loaded__(self) -> bool:
        return self.__loaded

    def __load__(self) -> T:
        if not self.__loaded:
            with self.__lock:
                if not self.__loaded:
                    self.__wrapped_object = self.__factory()
                    self.__loaded = True
        return cast(T, self.__wrapped_object)

    @property
    def __wrapped_object__(self) -> T:
        return self.__load__()

    def __call__(self, *args, **kwargs):
        return self.__wrapped_object__(*args, **kwargs) # type: ignore

    def __getattr__(self, attr: str) -> Any:
        # Dunder lookups (copy, pickle, IPython display hooks) must not trigger an import.
        if attr.startswith("__") and attr.endswith("__"):
            raise AttributeError(attr)
        return getattr(self.__wrapped_object__, attr)

    def __dir__(self) -> List[str]:
        return dir(self.__wrapped_object__)

    def __repr__(self):
        state = "loaded" if self.__loaded else "pending"
        return f"LazyObject({self.__name}, {state})"


def lazy_wrapper(factory: Callable[[], T]) -> T:
    """
    Decorate an import function so the module-level name resolves on first use while keeping the
    type of the imported object.

    ```py
    @lazy_wrapper
    def wandb():
        del globals()["wandb"]
        import wandb
        globals()["wandb"] = wandb
        return wandb
    ```

    Replacing the global keeps later lookups in the defining module off the wrapper.
    """
    return cast(T, LazyWrapper(factory.__name__, factory))
