from edfvae.core.plotting import CurveSeries, ReferenceLine, render_curves, render_histogram


class TestRenderCurves:
    def test_lines_bands_and_references(self):
        series = [
            CurveSeries("train", [0, 500, 1000], [-90.0, -70.0, -65.0], [-92.0, -71.0, -66.0], [-88.0, -69.0, -64.0]),
            CurveSeries("test", [0, 500, 1000], [-91.0, -72.0, -67.0], dashed=True),
        ]
        svg = render_curves(series, title="synthetic", references=[ReferenceLine("L̂", -60.0)])
        assert svg.startswith("<svg")
        assert svg.count("<polyline") == 2
        assert svg.count("<polygon") == 1
        assert "stroke-dasharray=\"6,3\"" in svg
        assert "L̂" in svg

    def test_title_is_escaped(self):
        svg = render_curves([CurveSeries("a", [0, 1], [0.0, 1.0])], title="β<1 & κ>2")
        assert "β&lt;1 &amp; κ&gt;2" in svg

    def test_non_finite_reference_skipped(self):
        series = [CurveSeries("a", [0, 1], [0.0, 1.0])]
        svg = render_curves(series, title="t", references=[ReferenceLine("x", float("nan"))])
        assert "stroke-dasharray=\"2,3\"" not in svg


class TestRenderHistogram:
    def test_grouped_bars(self):
        svg = render_histogram({"analytical": [8, 0, 0, 0, 0, 0, 0, 0, 0, 2], "empirical": [7] + [0] * 8 + [3]}, "β=1")
        assert svg.count("<rect") >= 20
        assert "analytical: 8" in svg
        assert "empirical: 3" in svg
