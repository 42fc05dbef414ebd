import threading
import unittest

from lrsens.scripting import Context
from lrsens.scripting.module import Rng
from lrsens.utils.lazyloading import lazy_wrapper, LazyWrapper

class Counter:
    def __init__(self):
        self.value = 7

    def __call__(self, x):
        return x + self.value

class TestLazyWrapper(unittest.TestCase):
    def setUp(self):
        self.created = []

        def factory():
            self.created.append(1)
            return Counter()

        self.lazy = LazyWrapper("counter", factory)

    def test_not_loaded_until_used(self):
        self.assertFalse(self.lazy.__is_loaded__)
        self.assertEqual(self.created, [])
        self.assertIn("pending", repr(self.lazy))

    def test_attribute_access_loads_once(self):
        self.assertEqual(self.lazy.value, 7)
        self.assertEqual(self.lazy.value, 7)
        self.assertTrue(self.lazy.__is_loaded__)
        self.assertEqual(len(self.created), 1)
        self.assertIn("loaded", repr(self.lazy))

    def test_call_forwards(self):
        self.assertEqual(self.lazy(3), 10)

    def test_dunder_lookup_does_not_load(self):
        self.assertFalse(hasattr(self.lazy, "__array_interface__"))
        self.assertFalse(self.lazy.__is_loaded__)

    def test_concurrent_first_access_loads_once(self):
        threads = [threading.Thread(target=lambda: self.lazy.value) for _ in range(8)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        self.assertEqual(len(self.created), 1)

    def test_decorator_keeps_factory_name(self):
        @lazy_wrapper
        def answer():
            return 42
        self.assertIsInstance(answer, LazyWrapper)
        self.assertIn("answer", repr(answer))
        self.assertEqual(answer.__wrapped_object__, 42)

class TestLazyModules(unittest.TestCase):
    def test_context_resolves_lazy_modules(self):
        ctx = Context(lambda ctx: ctx.get(Rng).seed, argv=["--seed", "5"])
        ctx.use(Rng)
        self.assertTrue(ctx.is_using(Rng))
        self.assertEqual(ctx.execute(), 5)
