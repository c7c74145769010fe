import doctest
import importlib
import pkgutil

import pytest

import tilebill

MODULES = sorted(m.name for m in pkgutil.iter_modules(tilebill.__path__, "tilebill."))


@pytest.mark.parametrize("name", MODULES)
def test_module_doctests(name):
    mod = importlib.import_module(name)
    result = doctest.testmod(mod, optionflags=doctest.ELLIPSIS)
    assert result.failed == 0
