"""List recovery for folded Reed-Solomon and multiplicity codes."""
from .codes import (Codeword, ListWord, frs_encode, frs_params, mult_encode, mult_params, plant_channel,
                    random_multipoly, random_poly)
from .errors import ListRecError
from .gf import build_extension, prime_field
from .poly import MultiPoly, Poly
from .prune import frs_pipeline, list_recover_frs, list_recover_mult, mult_pipeline
from .local import LocalCfg, local_list_recover, self_correct
from .amplify import AelCode, InnerCodeTable, ael_list_recover, sample_expander

__version__ = "0.1.0"

__all__ = [
    "Codeword", "ListWord", "frs_encode", "frs_params", "mult_encode", "mult_params", "plant_channel",
    "random_multipoly", "random_poly", "ListRecError", "build_extension", "prime_field", "MultiPoly", "Poly",
    "frs_pipeline", "list_recover_frs", "list_recover_mult", "mult_pipeline", "LocalCfg",
    "local_list_recover", "self_correct", "AelCode", "InnerCodeTable", "ael_list_recover", "sample_expander",
]
