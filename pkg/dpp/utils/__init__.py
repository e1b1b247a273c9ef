from .errors import (
    DPPError, ValidationError, NumericalError, SingularMatrixError, NumericalConsistencyError
)
from .validators import (
    validate_square, validate_hermitian, validate_index_set, clamp_probability, handle_errors
)
from .rng import make_rng, derive_seeds, stream_seed
from .timing import StepTimer, NULL_TIMER
