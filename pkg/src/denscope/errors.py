"""Exception types shared across the package.

Every error that crosses a module boundary carries enough context to name
the offending record, label, or instance, so callers (CLI, HTTP service)
can report it without re-deriving anything.
"""


class DenscopeError(Exception):
    """Base class for all package errors."""


class DatasetError(DenscopeError):
    """A dataset file or record violates the on-disk contract."""


class GeneratorConfigError(DenscopeError):
    """A synthetic generator config is structurally invalid."""


class UnknownLabelError(DenscopeError, KeyError):
    """A label name or id does not exist in the dataset."""

    def __init__(self, label):
        super().__init__(f"unknown label: {label!r}")
        self.label = label

    def __str__(self):
        # KeyError would repr-quote the message
        return self.args[0]


class NotDetectedError(DenscopeError):
    """The requested instance (scene, label) has no detection."""

    def __init__(self, label, scene_id):
        super().__init__(f"label {label!r} is not detected in scene {scene_id}")
        self.label = label
        self.scene_id = scene_id


class NoCoOccurrenceError(DenscopeError):
    """Two labels never appear in the same scene, so no joint
    distribution over their instances exists."""

    def __init__(self, label_s, label_t):
        super().__init__(
            f"labels {label_s!r} and {label_t!r} never co-occur in any scene"
        )
        self.label_s = label_s
        self.label_t = label_t


class EmptySubsetError(DenscopeError):
    """A scene subset does not intersect the label's occurrence set."""

    def __init__(self, label, n_subset):
        super().__init__(
            f"none of the {n_subset} selected scenes contain label {label!r}"
        )
        self.label = label


class EmbedDivergedError(DenscopeError):
    """The embedding optimizer produced non-finite coordinates."""

    def __init__(self, iteration):
        super().__init__(f"optimization diverged at iteration {iteration}")
        self.iteration = iteration


class NoDatasetError(DenscopeError):
    """The session has no dataset loaded."""

    def __init__(self):
        super().__init__("no dataset loaded")


class InvalidSceneError(DenscopeError):
    """A scene id falls outside the dataset's range."""

    def __init__(self, scene_id, num_scenes):
        super().__init__(f"scene id {scene_id} outside [0, {num_scenes})")
        self.scene_id = scene_id


class UnknownSelectionError(DenscopeError):
    """A selection id was never issued by this session."""

    def __init__(self, selection_id):
        super().__init__(f"unknown selection id {selection_id}")
        self.selection_id = selection_id
