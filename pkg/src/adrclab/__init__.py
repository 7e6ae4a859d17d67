"""Linear ADRC in output- and error-based form: gain synthesis,
transfer-function derivation, loop analysis and closed-loop simulation."""

from .design import (AdrcDesign, DesignParams, GainVariant, controller_gains,
                     make_variant, observer_gains, synthesize)
from .loopan import PLANTS, LoopSet, Margins, PlantModel, bode, build_loopset, margins
from .ratpoly import (Polynomial, PolyMatrix, RationalTf, eval_tf,
                      freq_response, resolvent)
from .tfsynth import (TfSet, check_equivalence, realizability_report,
                      synth_eadrc_tf, synth_g_fb, synth_g_ff, synth_g_pf,
                      synth_g_pf_bar, synth_g_pf_mod, synth_g_r, synth_tfset,
                      verify_closed_forms)

__version__ = "0.1.0"
