"""Exception and warning types shared across the toolkit."""


class GcaeError(Exception):
    """Base class for all toolkit errors."""


# --- graph construction and validation ---

class NonSquareError(GcaeError):
    """Adjacency matrix is not square."""


class AsymmetricError(GcaeError):
    """Adjacency matrix differs from its transpose."""


class NegativeWeightError(GcaeError):
    """Adjacency matrix carries a negative edge weight."""


class NonzeroDiagonalError(GcaeError):
    """Adjacency matrix has a nonzero diagonal entry."""


class ZeroDegreeVertexError(GcaeError):
    """A vertex has zero degree where normalization requires degree > 0."""


# --- linear algebra ---

class NotSymmetricError(GcaeError):
    """Matrix handed to the symmetric eigensolver is not symmetric."""


class NoConvergenceError(GcaeError):
    """Iterative solver exhausted its iteration budget."""


class DimensionMismatchError(GcaeError):
    """Vector/matrix dimensions do not conform."""


class NonpositiveLambdaMaxError(GcaeError):
    """Spectral rescaling needs a strictly positive largest eigenvalue."""


# --- neural network ---

class ShapeMismatchError(GcaeError):
    """Tensor shapes do not conform for a layer operation."""


class MissingCacheError(GcaeError):
    """Backward pass invoked without the cache from a matching forward pass."""


class InvalidRateError(GcaeError):
    """Dropout rate outside [0, 1)."""


class InvalidConfigError(GcaeError):
    """Model configuration violates its invariants."""


class EmptyDatasetError(GcaeError):
    """Training requested on an empty dataset."""


class NonfiniteLossError(GcaeError):
    """Training loss became non-finite or diverged past the guard threshold."""


class ModelNotTrainedError(GcaeError):
    """Embedding requested from a model that has not been trained."""


# --- baselines ---

class TooManyComponentsError(GcaeError):
    """More components requested than the data or basis can supply."""


class DegenerateDataError(GcaeError):
    """Data has zero variance in every dimension."""


# --- classification ---

class SingleClassError(GcaeError):
    """Binary training data contains only one class."""


class EmptyDataError(GcaeError):
    """Classifier handed an empty feature matrix."""


class TooFewSamplesError(GcaeError):
    """Fewer samples than cross-validation folds."""


class FoldMissingClassError(GcaeError):
    """A training fold would not contain both classes."""


# --- connectivity ---

class TooShortError(GcaeError):
    """Time series too short for the requested autoregressive order."""


class SingularRegressionWarning(UserWarning):
    """Rank-deficient lag regression; the affected influence entry is set to 0."""


# --- synthetic data ---

class BandTooWideError(GcaeError):
    """Smoothness band exceeds the number of graph frequencies."""


class InvalidNoiseSpecError(GcaeError):
    """Noise specification outside its valid ranges."""


class MalformedFileError(GcaeError):
    """File does not parse as the expected CSV schema."""
