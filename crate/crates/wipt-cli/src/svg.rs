//! Self-contained SVG 1.1 line plots for R-E regions. No external assets;
//! axes carry the region's units tag.

use wipt::region::{EnergyUnits, RERegion};
use wipt::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn units_label(units: EnergyUnits) -> &'static str {
    match units {
        EnergyUnits::Watts => "energy (W)",
        EnergyUnits::ZdcProxy => "energy (z_dc proxy)",
    }
}

/// Plot one or more region hulls on shared axes. Mixed energy units are
/// refused unless `normalize` is set, in which case each curve is scaled by
/// its own maximum energy.
pub fn plot_regions(
    regions: &[(&str, &RERegion)],
    title: &str,
    normalize: bool,
    comment: &str,
) -> Result<String> {
    if regions.is_empty() {
        return Err(Error::Domain("nothing to plot".into()));
    }
    let units = regions[0].1.energy_units;
    if !normalize && regions.iter().any(|(_, r)| r.energy_units != units) {
        return Err(Error::Domain(
            "regions carry different energy units; pass the normalization flag to overlay them"
                .into(),
        ));
    }

    let scale_of = |r: &RERegion| -> f64 {
        if normalize {
            r.max_energy().max(f64::MIN_POSITIVE)
        } else {
            1.0
        }
    };
    let mut x_max: f64 = 0.0;
    let mut y_max: f64 = 0.0;
    for (_, r) in regions {
        x_max = x_max.max(r.max_rate());
        y_max = y_max.max(r.max_energy() / scale_of(r));
    }
    x_max = x_max.max(f64::MIN_POSITIVE);
    y_max = y_max.max(f64::MIN_POSITIVE);

    let to_x = |rate: f64| MARGIN + (WIDTH - 2.0 * MARGIN) * rate / (x_max * 1.05);
    let to_y = |energy: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * energy / (y_max * 1.05);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!("<!-- {} -->\n", comment.replace("--", "- -")));
    svg.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{b}\" x2=\"{m}\" y2=\"{t}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN
    ));
    // Tick labels at the axis extremes.
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{:.3}</text>\n",
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 16.0,
        x_max
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{:.3e}</text>\n",
        MARGIN - 4.0,
        MARGIN + 4.0,
        y_max
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">rate (bits/s/Hz)</text>\n",
        WIDTH / 2.0,
        HEIGHT - 14.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        if normalize { "energy (normalized)" } else { units_label(units) }
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        title
    ));

    for (idx, (label, region)) in regions.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let scale = scale_of(region);
        let pts: Vec<String> = region
            .hull
            .iter()
            .map(|p| format!("{:.2},{:.2}", to_x(p.rate), to_y(p.energy / scale)))
            .collect();
        if pts.len() == 1 {
            // Rectangle corner: draw the box outline.
            let p = &region.hull[0];
            svg.push_str(&format!(
                "<polyline points=\"{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                to_x(0.0),
                to_y(p.energy / scale),
                to_x(p.rate),
                to_y(p.energy / scale),
                to_x(p.rate),
                to_y(0.0)
            ));
        } else {
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                pts.join(" ")
            ));
        }
        let legend_y = MARGIN + 18.0 * idx as f64 + 8.0;
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"3\" fill=\"{color}\"/>\n",
            WIDTH - MARGIN - 150.0,
            legend_y - 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n",
            WIDTH - MARGIN - 132.0,
            legend_y,
            label
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
