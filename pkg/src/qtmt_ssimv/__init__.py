"""QTMT intra partition search with SSIM-variation based split pruning."""

from .media_io import (FrameSequence, MediaFormatError, Plane, Rect, load_frames, load_pgm,
                       load_raw_yuv, load_y4m, write_overlay, write_pgm, write_raw_yuv, write_y4m)
from .intra import PredictedBlock, predict_all_modes, predict_np
from .ssim import SsimParams, ssim_block, ssim_map, ssim_sub_cu
from .ssimv import MT_MODES, SPLIT_MODES, SplitMode, SsimvResult, compute_ssimv, v_bt, v_qt, v_tt
from .rd import QpConfig, RdCost, encode_np, np_cost, split_cost
from .policy import PolicyDecision, select_modes, select_random, skip_quota
from .search import (DecisionRecord, PartitionNode, SearchConfig, SearchResult,
                     permitted_modes, search, search_frame, search_paired)
from .metrics import (AccuracyReport, RdPoint, TimingReport, bd_rate, overhead,
                      prediction_accuracy, time_saving)
from .experiment import analyze_regions, compare_with_random, evaluate

__version__ = "0.1.0"
