"""dipolesim: direct space-time electrodynamics of coupled oscillating dipoles.

Point-charge fields are evaluated exactly at numerically solved retarded
times; pairs of opposite charges form Lorentz-oscillator dipoles whose coupled
decay, energy exchange, and mechanically driven sideband spectra can be
simulated and cross-checked against analytic Green-function rates and an
independent Floquet quasienergy solver.
"""

from ._backend import BACKEND_NAME, HAVE_COMPILED, available_backends
from .constants import CODATA, Constants, DipoleParams, derive_dipole_params
from .errors import (
    ConfigError,
    DegenerateInputError,
    DipoleSimError,
    DomainError,
    HorizonError,
    NumericsError,
    PhysicsError,
    PoleError,
    SingularityError,
    SolverError,
    VelocityLimitError,
)
from .floquet import (
    CoupledHOParams,
    DriveSpec,
    FloquetProblem,
    QuasienergySpectrum,
    coupling_waveform,
    fourier_coupling,
    normal_modes,
    normal_modes_general,
    quasienergies,
    renormalized_coupling,
    sweep,
)
from .greens import (
    CouplingRates,
    GreensSample,
    analytic_dipole_fields,
    coupling_rates,
    dyson_pole_frequencies,
    dyson_two_scatterer,
    free_space_green,
    im_green_coincident,
    near_field_coupling,
    polarizability,
    se_rate,
)
from .lw import (
    FieldSample,
    field_on_grid,
    lw_fields,
    lw_fields_total,
    lw_potentials,
    retarded_time,
)
from .simulate import (
    LorentzDipole,
    MechanicalDrive,
    SimulationConfig,
    SimulationResult,
    com_position,
    run_simulation,
    scaled_population,
    total_energy,
)
from .spectra import (
    SpectrumResult,
    compare_to_floquet,
    find_peaks,
    windowed_fft,
)
from .trajectory import ChargeState, TrajectoryHistory

__version__ = "0.1.0"
