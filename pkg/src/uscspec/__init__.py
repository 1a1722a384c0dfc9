"""Emission and reflectivity spectra of a flux-qubit/LC circuit at arbitrary
coupling strength: static model, dressed basis, generalized master equation,
Floquet steady states, and spectral observables."""

from .model import (
    ModelKind,
    OutputKind,
    QubitFrame,
    SystemParams,
    build_output_operator,
    build_static_hamiltonian,
    heisenberg_derivative,
    parity_operator,
    qubit_frequency,
    sigma_tilde_x,
)
from .dressed import (
    DressedBasis,
    TransitionTable,
    build_transition_table,
    diagonalize,
    dressed_basis,
    frequency_components,
    jc_initial_labels,
    label_states,
    plain_labels,
)
from .gme import (
    BathChannel,
    ChannelKind,
    GmeConfig,
    Superoperator,
    build_drive_superoperators,
    build_gme,
    dephasing_superoperator,
    qubit_channel,
    resonator_channel,
    total_liouvillian,
)
from .steady import FloquetHarmonics, floquet_harmonics, harmonic_convergence, steady_state
from .spectra import (
    Normalization,
    ReflectivityMap,
    SpectrumSeries,
    emission_probe,
    emission_spectrum,
    matrix_element_report,
    reflectivity_point,
    reflectivity_spectrum,
    reflectivity_sweep,
)
from .errors import UscSpecError

__version__ = "0.1.0"

__all__ = [
    "BathChannel",
    "ChannelKind",
    "DressedBasis",
    "FloquetHarmonics",
    "GmeConfig",
    "ModelKind",
    "Normalization",
    "OutputKind",
    "QubitFrame",
    "ReflectivityMap",
    "SpectrumSeries",
    "Superoperator",
    "SystemParams",
    "TransitionTable",
    "UscSpecError",
    "build_drive_superoperators",
    "build_gme",
    "build_output_operator",
    "build_static_hamiltonian",
    "build_transition_table",
    "dephasing_superoperator",
    "diagonalize",
    "dressed_basis",
    "emission_probe",
    "emission_spectrum",
    "floquet_harmonics",
    "frequency_components",
    "harmonic_convergence",
    "heisenberg_derivative",
    "jc_initial_labels",
    "label_states",
    "matrix_element_report",
    "parity_operator",
    "plain_labels",
    "qubit_channel",
    "qubit_frequency",
    "reflectivity_point",
    "reflectivity_spectrum",
    "reflectivity_sweep",
    "resonator_channel",
    "sigma_tilde_x",
    "steady_state",
    "total_liouvillian",
    "__version__",
]
