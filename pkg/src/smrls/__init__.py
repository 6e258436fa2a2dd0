"""Real-time RBF network training with selective memory recursive least squares."""
from smrls.errors import DowndateSingular
from smrls.estimators import (
    EstimatorState,
    RlsTrainer,
    SgdTrainer,
    batch_oracle_weighted,
    ffrls_step,
    rank_one_update,
    sgd_step,
)
from smrls.input_space import (
    LatestSampleRule,
    MemoryUpdateRule,
    Normalizer,
    PartitionStore,
    SynthSample,
    encode_partition,
    memory_lookup,
    memory_update,
)
from smrls.kernels import BACKEND
from smrls.rbf import RbfNetwork, build_grid_network, evaluate, regressor
from smrls.selective import (
    SmrlsState,
    SmrlsTrainer,
    learned_knowledge,
    rebuild_information_matrix,
    run_stream,
    smrls_step,
)

__version__ = "0.1.0"
