from fractions import Fraction

import pytest

from aqg import finqg, instances
from aqg.suq2 import SUq2

FINITE = ("c_z2", "f_z2", "c_s3", "f_s3", "kac_paljutkin")


@pytest.fixture(scope="session")
def pipelines():
    return {name: finqg.run_pipeline(instances.BUILDERS[name]()) for name in FINITE}


@pytest.fixture(params=FINITE)
def pipe(request, pipelines):
    return pipelines[request.param]


@pytest.fixture(scope="session")
def eng():
    return SUq2(Fraction(1, 2), 6)
