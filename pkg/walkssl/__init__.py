"""
Copyright 2024 The walkssl authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""

import logging
import os
from .version import __version__
from dotenv import load_dotenv

load_dotenv()

from walkssl.libs import SysUtil, lcall, to_df, to_dict, to_list
from walkssl.core.mesh import Mesh, load_mesh, save_mesh, gen_synthetic, build_adjacency
from walkssl.core.resample import ResampleTargets, resample_to
from walkssl.core.walker import MeshDataset, TrainingSet, random_walk, make_batch
from walkssl.core.nn import get_preset, grad_check, gradcheck_suite
from walkssl.core.losses import LossConfig, nt_xent, kmeans_loss, combined_loss
from walkssl.core.pipeline import TrainConfig, RunConfig, Checkpoint, train, embed_dataset, load_config
from walkssl.core.eval import mean_average_precision, svm_train, svm_predict, accuracy


__all__ = [
    "SysUtil",
    "lcall",
    "to_df",
    "to_dict",
    "to_list",
    "Mesh",
    "load_mesh",
    "save_mesh",
    "gen_synthetic",
    "build_adjacency",
    "ResampleTargets",
    "resample_to",
    "MeshDataset",
    "TrainingSet",
    "random_walk",
    "make_batch",
    "get_preset",
    "grad_check",
    "gradcheck_suite",
    "LossConfig",
    "nt_xent",
    "kmeans_loss",
    "combined_loss",
    "TrainConfig",
    "RunConfig",
    "Checkpoint",
    "train",
    "embed_dataset",
    "load_config",
    "mean_average_precision",
    "svm_train",
    "svm_predict",
    "accuracy",
]


logger = logging.getLogger(__name__)
logger.setLevel(os.getenv("WALKSSL_LOG_LEVEL", "INFO").upper())
