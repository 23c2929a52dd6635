"""Single-output tactile skin emulator: compressive acquisition in simulated
analog hardware, sparse recovery, dictionary learning, and tactile perception."""

__version__ = "0.1.0"

from .core import (CircuitParams, DomainError, GridGeometry, PressureMap,
                   TactileFrame, linear_index, grid_position, to_conductance,
                   transduce)
from .firmware import (LCG_A, LCG_C, SeedTable, SensingMatrix, assign_seeds,
                       bipolar_weight, generate_sensing_matrix, lcg_step,
                       unipolar_voltage)
from .frontend import (AcquisitionConfig, MeasurementVector, acquire,
                       frame_rate, measure_once, quantize)
from .recovery import (Reconstruction, SparseCode, adaptive_reconstruct, omp,
                       reconstruct, sparsity_target)
from .dictionary import (Dictionary, TrainingCorpus, ksvd, preprocess,
                         sparse_code)
from .perception import (NoContactError, ObjectLibrary, SupportMetrics,
                         center_of_mass, classify, delta_pressure,
                         localization_error, max_pressure_trace,
                         support_accuracy, vote)
from .scenarios import (BounceSpec, ShapeSpec, bounce_event,
                        default_shape_specs, press_event, raster_baseline,
                        render_shape, shape_library)
