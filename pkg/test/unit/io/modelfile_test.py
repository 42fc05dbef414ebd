import json
from pathlib import Path
import tempfile
import unittest

import numpy as np

from lrsens.errors import ModelError
from lrsens.io import (
    load_model,
    packaged_models,
    parse_model,
    read_model,
    SCHEMA_VERSION,
    serialize_model
)
from lrsens.io.modelfile import model_to_dict

def birth_death_document():
    return {
        "schema_version": SCHEMA_VERSION,
        "name": "bd",
        "species": ["S"],
        "parameters": [{"name": "k", "value": 2.0}, {"name": "g", "value": 0.5}],
        "reactions": [
            {"reactants": {}, "products": {"S": 1},
             "rate": {"kind": "mass_action", "parameter": "k"}},
            {"reactants": {"S": 1}, "products": {},
             "rate": {"kind": "mass_action", "parameter": "g"}},
        ],
        "initial_state": [3],
        "observables": [{"kind": "species", "name": "x", "species": "S"}],
        "truncation": {"kind": "bounds", "bounds": {"S": 30}},
    }

class TestPackagedModels(unittest.TestCase):
    def test_listing(self):
        self.assertEqual(packaged_models(),
                         ("birth_death", "isomerization", "linear", "pure_death", "twogene"))

    def test_all_parse(self):
        for name in packaged_models():
            with self.subTest(name=name):
                model = load_model(name)
                self.assertEqual(model.source, f"{name}.json")
                self.assertGreater(len(model.observables), 0)

    def test_twogene(self):
        model = load_model("twogene")
        net = model.network
        self.assertEqual(net.num_species, 6)
        self.assertEqual(net.num_reactions, 12)
        np.testing.assert_allclose(net.nominal_parameters,
                                   [1.0, 60.0, 0.1, 1.0, 0.5, 0.02, 0.08, 0.02, 0.1])
        np.testing.assert_array_equal(model.initial_state, np.zeros(6))
        self.assertIsNone(model.truncation)
        with self.assertRaises(ModelError):
            model.build_truncation()

    def test_unknown(self):
        with self.assertRaises(ModelError):
            load_model("nonexistent")


class TestParseModel(unittest.TestCase):
    def test_round_trip(self):
        model = parse_model(json.dumps(birth_death_document()))
        again = parse_model(serialize_model(model))
        self.assertEqual(model, again)
        np.testing.assert_array_equal(again.initial_state, [3])
        self.assertEqual(model_to_dict(again)["initial_state"], {"S": 3})

    def test_packaged_round_trip(self):
        for name in ("linear", "twogene", "isomerization"):
            with self.subTest(name=name):
                model = load_model(name)
                self.assertEqual(parse_model(serialize_model(model)), model)

    def test_defaults(self):
        document = birth_death_document()
        del document["initial_state"], document["observables"], document["truncation"]
        model = parse_model(json.dumps(document))
        np.testing.assert_array_equal(model.initial_state, [0])
        self.assertEqual(model.observables, ())
        self.assertIsNone(model.truncation)

    def test_syntax_error_location(self):
        with self.assertRaises(ModelError) as ctx:
            parse_model('{\n  "schema_version": 1,\n  "species": [}\n')
        self.assertEqual(ctx.exception.line, 3)
        self.assertIsNotNone(ctx.exception.column)
        self.assertIn("line 3", str(ctx.exception))

    def test_semantic_errors(self):
        cases = [
            ("extra", 1),
            ("schema_version", 2),
            ("initial_state", [-1]),
            ("initial_state", [1, 2]),
            ("initial_state", {"T": 1}),
            ("initial_state", "three"),
            ("observables", {"kind": "species"}),
            ("observables", [{"kind": "species", "name": "x", "species": "S"}]*2),
            ("truncation", {"kind": "bounds", "bounds": {}}),
            ("truncation", {"kind": "bounds", "bounds": {"S": 1.5}}),
            ("truncation", {"kind": "hypercube"}),
            ("truncation", {"kind": "conservation", "bounds": {"S": 3}}),
        ]
        for key, value in cases:
            document = birth_death_document()
            document[key] = value
            with self.subTest(key=key, value=value), self.assertRaises(ModelError):
                parse_model(json.dumps(document))

    def test_error_path_and_source(self):
        document = birth_death_document()
        document["initial_state"] = {"S": -2}
        with self.assertRaises(ModelError) as ctx:
            parse_model(json.dumps(document), "bd.json")
        self.assertEqual(ctx.exception.path, "initial_state.S")
        self.assertTrue(str(ctx.exception).startswith("bd.json: "))

    def test_not_an_object(self):
        with self.assertRaises(ModelError):
            parse_model("[1, 2, 3]")


class TestReadModel(unittest.TestCase):
    def test_read(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "bd.json"
            path.write_text(json.dumps(birth_death_document()), encoding="utf-8")
            model = read_model(path)
            self.assertEqual(model.source, str(path))
            self.assertEqual(len(model.build_truncation()), 31)

    def test_missing_file(self):
        with tempfile.TemporaryDirectory() as directory:
            with self.assertRaises(ModelError):
                read_model(Path(directory) / "missing.json")
