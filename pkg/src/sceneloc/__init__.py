"""Camera relocalization from dense scene-coordinate predictions."""

__version__ = "0.1.0"

from .geometry import Intrinsics, Pose, PoseError, pose_error, project, backproject, reprojection_error
from .scene_map import scene_coords_from_depth, masked_coordinate_loss, to_point_cloud
from .predictor import CorrespondenceSet, OracleConfig, OracleSource, MapDirectorySource, sample_grid
from .pose_solver import RansacConfig, LocalizationResult, NoPoseError, ransac_localize, solve_pnp_minimal
from .augmentation import AugmentationConfig, AugmentedSample, augment
from .evaluation import FrameResult, accuracy_5cm_5deg, median_pose_error, build_report

__all__ = [
    "Intrinsics", "Pose", "PoseError", "pose_error", "project", "backproject", "reprojection_error",
    "scene_coords_from_depth", "masked_coordinate_loss", "to_point_cloud",
    "CorrespondenceSet", "OracleConfig", "OracleSource", "MapDirectorySource", "sample_grid",
    "RansacConfig", "LocalizationResult", "NoPoseError", "ransac_localize", "solve_pnp_minimal",
    "AugmentationConfig", "AugmentedSample", "augment",
    "FrameResult", "accuracy_5cm_5deg", "median_pose_error", "build_report",
]
