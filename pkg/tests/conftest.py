import pytest

from sipgame.engine import InvariantEngine
from sipgame.lang import parse_expr, parse_program
from sipgame.service.levels import load_levels
from sipgame.solver import SolverClient, SolverConfig

L1_SOURCE = """
fn int_sqrt(n: Natural): Integer {
  post(cnt^2 <= n & n < (cnt+1)^2);
  var cnt: Integer;
  var odd: Integer;
  var sqr: Integer;
  cnt := 0;
  odd := 1;
  sqr := 1;
  while (sqr <= n) {
    cnt := cnt + 1;
    odd := odd + 2;
    sqr := sqr + odd;
  }
}
"""


@pytest.fixture(scope="session")
def l1():
    return parse_program(L1_SOURCE)


@pytest.fixture(scope="session")
def levels():
    return load_levels()


@pytest.fixture(scope="session")
def solver():
    client = SolverClient(SolverConfig(timeout=10.0, pool_size=2))
    yield client
    client.close()


@pytest.fixture()
def l1_engine(l1, solver):
    return InvariantEngine(l1, solver)


def expr(program, text):
    return parse_expr(text, program.type_env)
