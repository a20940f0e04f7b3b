import pytest

from nv_magnetometry.physics.spins import (
    HyperfineCoupling,
    NuclearSpin,
    SpinRegister,
    dump_register,
    literature_register,
    load_register,
    nitrogen_mixture,
    register_from_document,
    register_hash,
    register_to_document,
)
from nv_magnetometry.utilities.errors import (
    ArtifactIOError,
    CapacityError,
    DomainError,
)


def test_negative_transverse_coupling():
    with pytest.raises(DomainError):
        HyperfineCoupling(10.0, -1.0)
    assert HyperfineCoupling.from_signed(10.0, -1.0).a_perpendicular == 1.0


def test_non_finite_coupling():
    with pytest.raises(DomainError):
        HyperfineCoupling(float("nan"), 0.0)


def test_species_gamma_resolution():
    assert NuclearSpin("13C").gamma == pytest.approx(10.705)
    assert NuclearSpin("1H").gamma == pytest.approx(42.577)
    assert NuclearSpin("29Si", gamma=8.465).gamma == 8.465


def test_species_gamma_mismatch():
    with pytest.raises(DomainError):
        NuclearSpin("13C", gamma=42.577)
    with pytest.raises(DomainError):
        NuclearSpin("29Si")


def test_register_capacity():
    nuclei = tuple(NuclearSpin("13C") for _ in range(5))
    assert SpinRegister(4.7, nuclei).dimension == 64
    with pytest.raises(CapacityError):
        SpinRegister(4.7, nuclei + (NuclearSpin("1H"),))


def test_register_field_and_weights():
    with pytest.raises(DomainError):
        SpinRegister(-0.1)
    with pytest.raises(DomainError):
        SpinRegister(1.0, (), ((0.0, 0.5), (1.0, 0.4)))
    with pytest.raises(DomainError):
        SpinRegister(1.0, (), ((0.0, 1.5), (1.0, -0.5)))


def test_default_detuning_component():
    assert SpinRegister(1.0).detuning_components() == ((0.0, 1.0),)


@pytest.mark.parametrize(
    "isotope, detunings",
    [("14N", (-2.16, 0.0, 2.16)), ("15N", (-1.5, 1.5)), (None, ())],
)
def test_nitrogen_mixture(isotope, detunings):
    mixture = nitrogen_mixture(isotope)
    assert tuple(d for d, _ in mixture) == pytest.approx(detunings)
    if mixture:
        register = SpinRegister(4.7, (), mixture)
        assert sum(w for _, w in register.detuning_components()) == (
            pytest.approx(1.0, abs=1e-12)
        )


def test_unknown_nitrogen_isotope():
    with pytest.raises(DomainError):
        nitrogen_mixture("13N")


def test_without_couplings():
    register = literature_register(("A", "D"))
    bare = register.without_couplings()
    assert len(bare.nuclei) == 2
    for nucleus in bare.nuclei:
        assert nucleus.coupling == HyperfineCoupling(0.0, 0.0)


def test_register_document(tmp_path):
    register = SpinRegister(
        4.7, literature_register().nuclei, nitrogen_mixture("14N")
    )
    assert register_from_document(register_to_document(register)) == register

    path = dump_register(register, tmp_path / "register.json")
    assert load_register(path) == register
    assert register_hash(load_register(path)) == register_hash(register)


def test_register_hash_changes_with_content():
    assert register_hash(literature_register(b0=4.7)) != register_hash(
        literature_register(b0=4.6)
    )


def test_nitrogen_given_by_isotope():
    document = {"schema": "nv-magnetometry/register@1", "b0_mT": 4.7,
                "nitrogen": "15N"}
    assert register_from_document(document).nitrogen == nitrogen_mixture(
        "15N"
    )


def test_load_register_errors(tmp_path):
    with pytest.raises(ArtifactIOError):
        load_register(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": "nv-magnetometry/register@1"}')
    with pytest.raises(ArtifactIOError):
        load_register(bad)
