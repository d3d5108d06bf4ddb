import pytest

from ekac.sieve import primes_up_to


@pytest.fixture(scope="session")
def table_1e4():
    return primes_up_to(10_000)


@pytest.fixture(scope="session")
def table_1e6():
    return primes_up_to(1_000_000)
