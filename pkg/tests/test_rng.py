from collections import Counter

from django.test import SimpleTestCase

from sbp.rng import RandomStream, rng_stream, stream_key
from sbp.tdl.interpreter import Environment, Evaluator
from sbp.tdl.parser import parse_expression

from .base import make_config


class StreamTest(SimpleTestCase):
    def test_same_key_same_draws(self):
        a = rng_stream(42, "w", "chicken1", "move", 3)
        b = rng_stream(42, "w", "chicken1", "move", 3)
        self.assertEqual([a.next_u64() for _ in range(5)], [b.next_u64() for _ in range(5)])

    def test_streams_are_keyed(self):
        keys = {
            stream_key(42, "w", "chicken1", "move", 0),
            stream_key(43, "w", "chicken1", "move", 0),
            stream_key(42, "w", "chicken2", "move", 0),
            stream_key(42, "w", "chicken1", "eat", 0),
            stream_key(42, "w", "chicken1", "move", 1),
        }
        self.assertEqual(5, len(keys))

    def test_position_resumes(self):
        stream = rng_stream(7, "w", "e", "p", 0)
        for _ in range(3):
            stream.next_u64()
        rest = [stream.next_u64() for _ in range(3)]
        resumed = RandomStream(stream.key, 3)
        self.assertEqual(rest, [resumed.next_u64() for _ in range(3)])
        self.assertEqual(6, stream.position)

    def test_randint_bounds(self):
        stream = rng_stream(1, "w", "e", "p", 0)
        draws = [stream.randint(-2, 2) for _ in range(500)]
        self.assertEqual({-2, -1, 0, 1, 2}, set(draws))
        self.assertEqual(5, stream.randint(5, 5))
        with self.assertRaises(ValueError):
            stream.randint(3, 2)

    def test_random_float(self):
        stream = rng_stream(1, "w", "e", "p", 0)
        for _ in range(100):
            self.assertTrue(0.0 <= stream.random() < 1.0)

    def test_negative_and_huge_seeds(self):
        self.assertEqual(stream_key(-1, "w", "e", "p", 0), stream_key(2**64 - 1, "w", "e", "p", 0))


class RandomValueTest(SimpleTestCase):
    def test_one_to_four_is_uniform(self):
        node, diagnostics = parse_expression("randomValue(1..4)")
        self.assertEqual([], diagnostics)
        config = make_config({"w": {"e": {}}})
        evaluator = Evaluator(Environment("w", "e", "p"), config, rng=rng_stream(42, "w", "e", "p", 0))
        counts = Counter(evaluator.value(node) for _ in range(10000))
        self.assertEqual([1, 2, 3, 4], sorted(counts))
        for value, count in counts.items():
            self.assertTrue(0.22 <= count / 10000 <= 0.28, (value, count))

    def test_single_bound(self):
        node, _ = parse_expression("randomValue(3)")
        config = make_config({"w": {"e": {}}})
        evaluator = Evaluator(Environment("w", "e", "p"), config, rng=rng_stream(0, "w", "e", "p", 0))
        self.assertEqual({1, 2, 3}, {evaluator.value(node) for _ in range(200)})

