import unittest

from lrsens.errors import UsageError
from lrsens.scripting import Context, ContextModule, State
from lrsens.scripting.module import Rng

class Recorder(ContextModule):
    NAME = "Recorder"

    def __init__(self, context: Context):
        super().__init__(context)
        self.events = []

    def _define_arguments(self):
        self.events.append("define")
        self.context.argument_parser.add_argument("--label", type=str, default="run-{seed}")

    def _init(self):
        self.events.append("init")

    def _start(self):
        self.events.append("start")

    def _ready(self):
        self.events.append("ready")

    def _stop(self):
        self.events.append("stop")

    def _finish(self):
        self.events.append("finish")


class Failing(ContextModule):
    NAME = "Failing"

    def _start(self):
        raise RuntimeError("cannot start")

class TestContext(unittest.TestCase):
    def test_lifecycle(self):
        def job(ctx: Context):
            ctx.get(Recorder).events.append("job")
            return 42

        ctx = Context(job, argv=[])
        recorder = ctx.use(Recorder)
        self.assertEqual(ctx.execute(), 42)
        self.assertEqual(recorder.events,
                         ["define", "init", "start", "ready", "job", "stop", "finish"])
        self.assertEqual(ctx.state, State.Finished)

    def test_job_error_is_reraised(self):
        def job(ctx: Context):
            raise UsageError("bad input")

        ctx = Context(job, argv=[])
        recorder = ctx.use(Recorder)
        with self.assertRaises(UsageError):
            ctx.execute()
        self.assertEqual(recorder.events[-2:], ["stop", "finish"])

    def test_module_error_skips_job(self):
        ran = []
        ctx = Context(lambda ctx: ran.append(True), argv=[])
        recorder = ctx.use(Recorder)
        ctx.use(Failing)
        with self.assertRaises(RuntimeError):
            ctx.execute()
        self.assertEqual(ran, [])
        self.assertNotIn("ready", recorder.events)
        self.assertEqual(recorder.events[-2:], ["stop", "finish"])

    def test_config_formatting(self):
        ctx = Context(lambda ctx: ctx.config.label, argv=["--seed", "7"])
        ctx.use(Rng)
        ctx.use(Recorder)
        self.assertEqual(ctx.execute(), "run-7")

    def test_config_formatting_error(self):
        ctx = Context(lambda ctx: None, argv=["--label", "run-{missing}"])
        ctx.use(Recorder)
        with self.assertRaises(UsageError):
            ctx.execute()

    def test_arguments_callback(self):
        def arguments(parser):
            parser.add_argument("--count", type=int, default=1)

        ctx = Context(lambda ctx: ctx.config.count, argv=["--count", "3"], arguments=arguments)
        self.assertEqual(ctx.execute(), 3)

    def test_module_lookup(self):
        ctx = Context(lambda ctx: None, argv=[])
        rng = ctx.use(Rng)
        self.assertIs(ctx.get(Rng), rng)
        self.assertTrue(ctx.is_using(Rng))
        self.assertFalse(ctx.is_using(Recorder))
        with self.assertRaises(KeyError):
            ctx.get(Recorder)
        with self.assertRaises(AssertionError):
            ctx.use(Rng)

    def test_rng_streams(self):
        def job(ctx: Context):
            rng = ctx.get(Rng)
            return rng.seed, rng.stream(3)

        ctx = Context(job, argv=["--seed", "5"])
        ctx.use(Rng)
        seed, stream = ctx.execute()
        self.assertEqual(seed, 5)
        self.assertEqual((stream.seed, stream.stream_index), (5, 3))
