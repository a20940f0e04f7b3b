"""Simulation, waveform synthesis and analysis toolkit for pulsed magnetometry
with single NV centres in diamond

.. moduleauthor:: Francesco Andreuzzi <andreuzzi.francesco@gmail.com>

"""

__author__ = "Francesco Andreuzzi"
__copyright__ = "Copyright 2020"
__credits__ = ["Francesco Andreuzzi"]
__license__ = "MIT"
__release__ = "0.1"
__subrelease__ = "0"
__version__ = __release__ + "." + __subrelease__
__maintainer__ = "Francesco Andreuzzi"
__email__ = "andreuzzi.francesco@gmail.com"
__status__ = "Development"
__name__ = "nv_magnetometry"

from .physics.spins import (
    HyperfineCoupling,
    NuclearSpin,
    SpinRegister,
    literature_register,
)
from .sequences.plan import SequencePlan, build_sequence
from .sequences.timing import expand_timing
from .simulator.register_evolution import (
    evolve_ideal,
    simulate_sweep,
)
from .analytic.multipulse import (
    full_spectrum,
    invert_hyperfine,
    single_nucleus_dip,
)
from .estimation.spectrum import spectrum
from .estimation.pipelines import (
    extract_depth_pipeline as extract_depth,
    extract_hyperfine_pipeline as extract_hyperfine,
)
from .utilities.traces import MeasurementTrace, read_trace, write_trace
