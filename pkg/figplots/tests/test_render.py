"""Schema validation and rendering behavior."""

import numpy as np
import pytest

from figplots.figures import build_figure
from figplots.render import main, render
from figplots.schema import SCHEMAS, PlotJob, SchemaError, load_csv


class TestSchema:
    def test_unknown_figure_rejected(self, tmp_path):
        with pytest.raises(SchemaError):
            PlotJob("fig9", str(tmp_path), str(tmp_path / "x.png"))

    def test_empty_csv_rejected(self, tmp_path):
        path = tmp_path / "fig2_transfer.csv"
        path.write_text("")
        with pytest.raises(SchemaError):
            load_csv(str(path), ["ratio", "P3_square", "P3_shaped"])

    def test_header_only_rejected(self, tmp_path):
        path = tmp_path / "fig2_transfer.csv"
        path.write_text("ratio,P3_square,P3_shaped\n")
        with pytest.raises(SchemaError):
            load_csv(str(path), ["ratio", "P3_square", "P3_shaped"])

    def test_wrong_header_rejected(self, tmp_path):
        path = tmp_path / "fig2_transfer.csv"
        path.write_text("ratio,other\n1,2\n")
        with pytest.raises(SchemaError):
            load_csv(str(path), ["ratio", "P3_square", "P3_shaped"])

    def test_non_numeric_cell_rejected(self, tmp_path):
        path = tmp_path / "fig2_transfer.csv"
        path.write_text("ratio,P3_square,P3_shaped\n1,a,3\n")
        with pytest.raises(SchemaError):
            load_csv(str(path), ["ratio", "P3_square", "P3_shaped"])

    def test_missing_file_exit_code(self, tmp_path, capsys):
        code = main([
            "--figure", "fig2", "--in", str(tmp_path), "--out", str(tmp_path / "f.png"),
        ])
        assert code == 2
        assert "fig2_transfer.csv" in capsys.readouterr().err


class TestRendering:
    def test_fig2_plots_exactly_the_csv_curves(self, figure_data):
        job = PlotJob("fig2", str(figure_data), str(figure_data / "fig2.png"))
        fig = build_figure(job)
        (ax,) = fig.axes
        data = load_csv(
            str(figure_data / "fig2_transfer.csv"), ["ratio", "P3_square", "P3_shaped"]
        )
        square, shaped = ax.lines
        np.testing.assert_array_equal(square.get_xdata(), data["ratio"])
        np.testing.assert_array_equal(square.get_ydata(), data["P3_square"])
        np.testing.assert_array_equal(shaped.get_ydata(), data["P3_shaped"])

    def test_fig5_panels(self, figure_data):
        job = PlotJob("fig5", str(figure_data), str(figure_data / "fig5.png"))
        fig = build_figure(job)
        wave_ax, contrast_ax = fig.axes
        assert len(wave_ax.lines) == 3
        traj = load_csv(
            str(figure_data / "fig5_trajectory.csv"),
            SCHEMAS["fig5"]["trajectory"][1],
        )
        np.testing.assert_array_equal(contrast_ax.lines[0].get_ydata(), traj["D"])

    def test_fig8_heatmap_values_come_from_csv(self, figure_data):
        job = PlotJob("fig8", str(figure_data), str(figure_data / "fig8.png"))
        fig = build_figure(job)
        mesh = fig.axes[0].collections[0]
        table = load_csv(
            str(figure_data / "fig8_lifetimes.csv"), ["tau2_us", "tau3_us", "D_final"]
        )
        plotted = np.sort(np.asarray(mesh.get_array()).ravel())
        np.testing.assert_allclose(plotted, np.sort(table["D_final"]), rtol=0, atol=0)

    def test_render_writes_file(self, figure_data, tmp_path):
        out = tmp_path / "fig2.png"
        assert main(["--figure", "fig2", "--in", str(figure_data), "--out", str(out)]) == 0
        assert out.stat().st_size > 0

    def test_svg_output_supported(self, figure_data, tmp_path):
        out = tmp_path / "fig2.svg"
        render(PlotJob("fig2", str(figure_data), str(out)))
        text = out.read_text()
        assert "<svg" in text
