"""roadcov: car/truck classification from fixed highway cameras.

Background subtraction finds candidate regions, region covariance
descriptors summarize them, and a labeled library on the SPD manifold
classifies each region as Car, Truck, Multiple, or Junk.
"""

from .calibration import Calibration, angle_from_baseline, rotate_and_crop
from .descriptor import (CovarianceDescriptor, FeatureSet, FeatureTensor,
                         covariance, feature_tensor, generalized_eigenvalues,
                         spd_distance)
from .evaluation import (Detection, EvaluationReport, TruthBox,
                         evaluate_detections, match_detections)
from .frames import FrameSequence, load_sequence
from .ontology import ClassLabel, ClassificationResult, OntologyLibrary, classify
from .preprocess import (BackgroundModel, CleanParams, binarize_sequence,
                         mean_background, subtract_gray)
from .segmentation import (Region, SegmentationParams, connected_components,
                           kmeans_pixels, refine_regions, segment_frame)
from .synthetic import SceneSpec, VehicleTrack, generate

__version__ = "0.1.0"
