"""
Scenario macros: named updates expanded into core updates before commit.

A macro has parameter names and an expansion, a list of TDL update
expressions. Inside the expansion `$name` is an argument, and `me` and
`myworld` are the entity and world of the process that emitted the macro.
Expansions are evaluated against the snapshot of the tick being closed and
are single level: they may produce guarded core updates but no macros.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

from django.core.exceptions import ValidationError

from .exceptions import ExpansionFailure, RuntimeFault, UnknownMacro
from .tdl.checker import check_template
from .tdl.interpreter import Environment, Evaluator
from .tdl.parser import parse_update_expression
from .updates import CoreUpdate, Guarded, Macro
from .utils import validate_name

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MacroDefinition:
    name: str
    params: Tuple[str, ...]
    expansion: Tuple[str, ...]  # source text of each template
    templates: Tuple = ()  # parsed update expressions

    @property
    def arity(self):
        return len(self.params)


class MacroRegistry(object):
    """The macros a scenario declares. Immutable once the engine starts."""

    def __init__(self, definitions=()):
        self._definitions = {}
        for definition in definitions:
            self._definitions[definition.name] = definition

    @classmethod
    def build(cls, declarations):
        """
        Build a registry from {name: {"params": [...], "expansion": [...]}}.
        Returns (registry, problems) where problems is a list of
        (macro name, message) pairs; the registry only holds valid macros.
        """
        definitions = []
        problems = []
        for name in sorted(declarations):
            declaration = declarations[name]
            params = tuple(declaration.get("params", ()))
            sources = tuple(declaration.get("expansion", ()))
            templates = []
            failed = False
            try:
                validate_name(name)
                for param in params:
                    validate_name(param)
            except ValidationError as e:
                problems.append((name, "; ".join(e.messages)))
                continue
            for source in sources:
                node, diagnostics = parse_update_expression(source)
                if node is not None:
                    diagnostics = list(diagnostics) + check_template(node, params)
                for diagnostic in diagnostics:
                    if diagnostic.is_error:
                        problems.append((name, "%s in %r" % (diagnostic, source)))
                        failed = True
                templates.append(node)
            if not failed:
                definitions.append(MacroDefinition(name, params, sources, tuple(templates)))
        return cls(definitions), problems

    def __contains__(self, name):
        return name in self._definitions

    def __iter__(self):
        return iter(sorted(self._definitions))

    def __len__(self):
        return len(self._definitions)

    def get(self, name):
        try:
            return self._definitions[name]
        except KeyError:
            raise UnknownMacro(name)

    def arities(self):
        return {name: definition.arity for name, definition in self._definitions.items()}

    def declarations(self):
        return {
            name: {"params": list(d.params), "expansion": list(d.expansion)}
            for name, d in sorted(self._definitions.items())
        }


def expand_update(update, snapshot, macros, emitter=None):
    """
    Return the list of core (possibly guarded) updates `update` stands for.

    `emitter` is the Path of the emitting process; macros that use `me` or
    `myworld` need it. Raises UnknownMacro or ExpansionFailure.
    """
    if isinstance(update, (CoreUpdate, Guarded)):
        return [update]
    if not isinstance(update, Macro):
        raise TypeError("%r is not an update" % (update,))
    definition = macros.get(update.name)
    if len(update.args) != definition.arity:
        raise ExpansionFailure(
            update.name,
            "takes %d argument(s), %d given" % (definition.arity, len(update.args)),
        )
    if emitter is not None:
        env = Environment(emitter.world, emitter.entity or "", emitter.property or "", snapshot.tick)
    else:
        env = Environment("", "", "", snapshot.tick)
    params = dict(zip(definition.params, update.args))
    evaluator = Evaluator(env, snapshot, params=params)
    expanded = []
    for template in definition.templates:
        try:
            result = evaluator.update(template)
        except RuntimeFault as e:
            raise ExpansionFailure(update.name, e.msg)
        if isinstance(result, Macro):
            raise ExpansionFailure(update.name, "expansions cannot use other macros")
        expanded.append(result)
    logger.debug("Expanded %s into %d update(s)", update.render(), len(expanded))
    return expanded


__all__ = ["MacroDefinition", "MacroRegistry", "expand_update"]
