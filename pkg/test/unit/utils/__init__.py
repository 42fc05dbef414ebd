from . import lazyloading_test
