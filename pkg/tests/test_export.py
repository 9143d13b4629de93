"""Model export: lossless JSON round trip, byte determinism, LP text."""
import json

from linkforge.model import (
    SynthesisConfig,
    build_micp_relaxation,
    build_minlp,
    export_model,
    model_from_json,
    model_to_json,
    model_to_lp,
)


def small_cfg():
    return SynthesisConfig(K=3, T=4, S=2, box_side=4.0, lam=0.01,
                           target_samples=((1.0, 0.0), (0.0, -1.0), (-1.0, 0.0), (0.0, 1.0)))


def test_json_roundtrip_structurally_identical():
    model = build_minlp(small_cfg())
    back = model_from_json(json.loads(export_model(model, "json").decode()))
    assert list(back.variables) == list(model.variables)
    assert back.variables == model.variables
    assert back.linear == model.linear
    assert back.quadratic == model.quadratic
    assert back.sos_sets == model.sos_sets
    assert back.objective.quad == model.objective.quad
    assert back.objective.lin == model.objective.lin
    assert back.objective.constant == model.objective.constant
    assert model_to_json(back) == model_to_json(model)


def test_exports_byte_identical_across_builds():
    a = build_micp_relaxation(small_cfg())
    b = build_micp_relaxation(small_cfg())
    assert export_model(a, "json") == export_model(b, "json")
    assert export_model(a, "lp") == export_model(b, "lp")


def test_lp_header_counts_match_metadata():
    model = build_minlp(small_cfg())
    text = export_model(model, "lp").decode()
    counts = model.metadata["constraintCounts"]
    header = next(line for line in text.splitlines()
                  if line.startswith("\\ constraint-set counts:"))
    for tag, n in counts.items():
        assert f"{tag}={n}" in header
    assert f"\\ binaries: {model.binary_count}" in text
    assert text.startswith("\\ linkforge model export")
    assert text.rstrip().endswith("End")


def test_lp_flags_nonconvex_and_lists_sos():
    model = build_minlp(small_cfg())
    text = model_to_lp(model)
    assert "non-convex quadratic" in text
    assert "\nSOS\n" in text
    assert " S2 :: " in text
    inlined = model_to_lp(model, inline_sos=True)
    assert "\nSOS\n" not in inlined
    assert "inlined via logarithmic binary encodings" in inlined


def test_micp_lp_has_no_nonconvex_flag():
    model = build_micp_relaxation(small_cfg())
    text = model_to_lp(model)
    assert "non-convex quadratic" not in text


def test_lp_sections_present():
    model = build_minlp(small_cfg())
    text = model_to_lp(model)
    for section in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
        assert f"\n{section}\n" in text or text.startswith(section)
