//! Dependency-free SVG heatmaps.
//!
//! Diverging colormap centered at 0: negatives blend toward blue, positives
//! toward red, zero is the neutral midpoint. The rendering is a pure
//! function of the matrix entries, so identical matrices give identical
//! bytes. A raw CSV always accompanies the SVG; the image is a view, not
//! the data.

use symbreak::tensor::WeightMatrix;

const CELL: usize = 24;
const MARGIN: usize = 8;

// Diverging endpoints (dark blue, near-white, dark red).
const NEG: [f64; 3] = [33.0, 102.0, 172.0];
const MID: [f64; 3] = [247.0, 247.0, 247.0];
const POS: [f64; 3] = [178.0, 24.0, 43.0];

fn blend(a: [f64; 3], b: [f64; 3], t: f64) -> String {
    let ch = |i: usize| (a[i] + (b[i] - a[i]) * t).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", ch(0), ch(1), ch(2))
}

/// Map a value to a hex color, scaling by the matrix's max magnitude.
fn color(v: f64, vmax: f64) -> String {
    let t = (v / vmax).clamp(-1.0, 1.0);
    if t < 0.0 {
        blend(MID, NEG, -t)
    } else {
        blend(MID, POS, t)
    }
}

/// Render `w` as a standalone SVG heatmap with one rect per entry.
pub fn heatmap_svg(w: &WeightMatrix) -> String {
    let (k, d) = (w.k(), w.d());
    let width = 2 * MARGIN + d * CELL;
    let height = 2 * MARGIN + k * CELL;
    // All-zero matrices scale against 1 so every cell lands on the midpoint.
    let vmax = if w.max_abs() > 0.0 { w.max_abs() } else { 1.0 };
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    s.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    ));
    for i in 0..k {
        for j in 0..d {
            let v = w.entry(i, j);
            let x = MARGIN + j * CELL;
            let y = MARGIN + i * CELL;
            s.push_str(&format!(
                "  <rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{}\" \
                 stroke=\"#ffffff\" stroke-width=\"1\"><title>w[{i}][{j}] = {v:.16e}</title></rect>\n",
                color(v, vmax)
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_is_deterministic_and_signed() {
        let w = WeightMatrix::from_rows(&[vec![1.0, -1.0], vec![0.0, 0.5]]).unwrap();
        let a = heatmap_svg(&w);
        let b = heatmap_svg(&w);
        assert_eq!(a, b, "same matrix must render to identical bytes");
        assert!(a.contains("#b2182b"), "max positive entry renders full red");
        assert!(a.contains("#2166ac"), "min negative entry renders full blue");
        assert!(a.contains("#f7f7f7"), "zero entry renders the neutral midpoint");
        assert!(a.starts_with("<svg "), "standalone SVG root element");
    }

    #[test]
    fn heatmap_handles_zero_matrix() {
        let w = WeightMatrix::zeros(3, 2);
        let svg = heatmap_svg(&w);
        assert_eq!(svg.matches("<rect").count(), 7, "background plus 6 cells");
        assert!(!svg.contains("NaN"), "zero scale must not divide to NaN");
    }
}
