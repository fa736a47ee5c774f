"""Exception types shared across the decision modules."""

from __future__ import annotations


class MethodInapplicable(ValueError):
    """The chosen method's class precondition does not hold."""


class NotLinear(MethodInapplicable):
    pass


class NotAcyclic(MethodInapplicable):
    pass


class NotFDET(MethodInapplicable):
    """Some body instantiation has two or more head images."""


class InstanceTooLarge(ValueError):
    """A brute-force search was asked to exceed its fact cap."""


class FormulaTooLarge(ValueError):
    """A rewriting would exceed the configured size guard."""
