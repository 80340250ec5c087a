"""
.. module:: preservation
    :platform: Linux
    :synopsis: randomized trials checking that local expansions keep the
        SPD and globally standard classes
"""
import logging
import dataclasses
import numpy as np
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import TAIL
from libbandgraph.classify import is_q_graph
from libbandgraph.classify import scaling_order
from libbandgraph.molecular import StructureError
from libbandgraph.operators import normalize
from libbandgraph.structure import is_spd
from libbandgraph.structure import is_globally_standard
from libbandgraph.local import expand_atom
from libbandgraph.local import operator_name
from libbandgraph.local import pending_atoms
from libbandgraph.texpansion import BUCKET_A
from libbandgraph.texpansion import default_error_order
from libbandgraph.texpansion import seed_second_order
from libbandgraph.serialize import dumps

LOGGER = logging.getLogger("bandgraph.preservation")

# expansions applied along one walk before going back to a seed graph
MAX_DEPTH = 6

SPD = "SPD"
GLOBALLY_STANDARD = "globally standard"


@dataclasses.dataclass
class Violation:
    """
    An expansion whose input is in a class and one output is not.
    """
    operator: str
    atom: int
    kind: str
    graph: GraphTerm
    output: GraphTerm

    def to_dict(self) -> dict:
        """
        Export the violation.
        """
        return {
            "operator": self.operator,
            "atom": self.atom,
            "class": self.kind,
            "graph": dumps(self.graph).decode(),
            "output": dumps(self.output).decode(),
        }


@dataclasses.dataclass
class PreservationReport:
    """
    Trials per operator, outputs checked per class and violations found.
    """
    seed: int
    trials: dict
    checked: dict
    violations: list

    @property
    def passed(self) -> bool:
        """
        True if no output left the class of its input.
        """
        return not self.violations

    def to_dict(self) -> dict:
        """
        Export the report.
        """
        return {
            "seed": self.seed,
            "trials": dict(sorted(self.trials.items())),
            "checked": dict(sorted(self.checked.items())),
            "passed": self.passed,
            "violations": [v.to_dict() for v in self.violations],
        }


def _walkable(graph: GraphTerm, error_order: int) -> bool:
    if any(weight.form == TAIL for weight in graph.weights):
        return False

    if is_q_graph(graph) or graph.is_labelled():
        return False

    if scaling_order(graph) > error_order:
        return False

    return bool(pending_atoms(graph))


def preservation_trials(
        n_trials: int,
        seed: int = 0,
        error_order: int = None) -> PreservationReport:
    """
    Walk at random through the local expansions of the second order higher
    order graphs. Each step expands one pending atom and normalizes the
    outputs: when the input is SPD (globally standard) every output must
    be SPD (globally standard). A walk goes back to a seed graph after
    ``MAX_DEPTH`` steps or when no output can be expanded further.
    """
    error_order = error_order or default_error_order(2)
    rng = np.random.default_rng(seed)

    starts = [
        graph for graph in seed_second_order(error_order).bucket(BUCKET_A)
        if _walkable(graph, error_order)
    ]
    if not starts:
        raise StructureError("no seed graph has an atom to expand")

    trials = {}
    checked = {SPD: 0, GLOBALLY_STANDARD: 0}
    violations = []

    current = None
    depth = 0
    done = 0

    while done < n_trials:
        if current is None or depth >= MAX_DEPTH:
            current = starts[int(rng.integers(len(starts)))]
            depth = 0

        atoms = pending_atoms(current)
        atom = atoms[int(rng.integers(len(atoms)))]
        name = operator_name(current, atom)

        classes = []
        if is_spd(current):
            classes.append((SPD, is_spd))
            if is_globally_standard(current):
                classes.append((GLOBALLY_STANDARD, is_globally_standard))

        outputs = []
        for term in expand_atom(current, atom):
            outputs.extend(normalize(term))

        for output in outputs:
            for kind, predicate in classes:
                checked[kind] += 1
                if not predicate(output):
                    LOGGER.warning(
                        "%s expansion at atom %d leaves the %s class",
                        name, atom, kind)
                    violations.append(
                        Violation(name, atom, kind, current, output))

        trials[name] = trials.get(name, 0) + 1
        done += 1
        depth += 1

        follow = [g for g in outputs if _walkable(g, error_order)]
        current = follow[int(rng.integers(len(follow)))] if follow else None

    report = PreservationReport(seed, trials, checked, violations)

    LOGGER.info("Preservation trials: %s, %d violations",
                report.trials, len(violations))

    return report
