//! Static SVG figures. Planar pictures use the bounding ball as the view box
//! with the y axis pointing up.

use std::fmt::Write;

use crate::axis::FilteredAxis;
use crate::critical::CriticalProfile;
use crate::scene::SiteScene;

fn num(v: f64) -> String {
    format!("{v:.6}")
}

pub struct Figure {
    r: f64,
    body: String,
}

impl Figure {
    pub fn new(scene: &SiteScene) -> Self {
        let r = scene.bounding_radius;
        let mut f = Figure { r, body: String::new() };
        let _ = writeln!(
            f.body,
            r#"<circle cx="0" cy="0" r="{}" fill="none" stroke="black" stroke-width="{}"/>"#,
            num(r),
            num(r / 400.0)
        );
        for p in &scene.sites {
            let _ = writeln!(
                f.body,
                r#"<circle cx="{}" cy="{}" r="{}" fill="black"/>"#,
                num(p[0]),
                num(p.get(1).copied().unwrap_or(0.0)),
                num(r / 150.0)
            );
        }
        f
    }

    pub fn axis(mut self, axis: &FilteredAxis, color: &str) -> Self {
        let w = num(self.r / 250.0);
        for k in 0..axis.segments.len() {
            let (a, b) = axis.segment_points(k);
            let _ = writeln!(
                self.body,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="{w}"/>"#,
                num(a[0]),
                num(a[1]),
                num(b[0]),
                num(b[1])
            );
        }
        for &i in &axis.isolated {
            let p = &axis.vertices[i];
            let _ = writeln!(
                self.body,
                r#"<circle cx="{}" cy="{}" r="{}" fill="{color}"/>"#,
                num(p[0]),
                num(p[1]),
                num(self.r / 100.0)
            );
        }
        self
    }

    pub fn polyline(mut self, points: &[Vec<f64>], color: &str) -> Self {
        let pts: Vec<String> = points.iter().map(|p| format!("{},{}", num(p[0]), num(p[1]))).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{}"/>"#,
            pts.join(" "),
            num(self.r / 300.0)
        );
        self
    }

    pub fn render(&self) -> String {
        let r = num(self.r);
        let d = num(2.0 * self.r);
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-{r} -{r} {d} {d}\" width=\"600\" height=\"600\">\n\
             <g transform=\"scale(1,-1)\">\n{}</g>\n</svg>\n",
            self.body
        )
    }
}

/// Plot of `χ(t)` on `[0, R_max] x [0, 1]`.
pub fn profile_plot(profile: &CriticalProfile) -> String {
    let (w, h) = (600.0, 300.0);
    let x = |t: f64| 40.0 + (w - 60.0) * t / profile.r_max.max(1e-300);
    let y = |c: f64| h - 30.0 - (h - 50.0) * c;
    let pts: Vec<String> =
        profile.t_grid.iter().zip(&profile.chi).map(|(&t, &c)| format!("{},{}", num(x(t)), num(y(c)))).collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" width=\"{w}\" height=\"{h}\">\n\
         <line x1=\"40\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"40\" y1=\"{y0}\" x2=\"40\" y2=\"{y1}\" stroke=\"black\"/>\n\
         <text x=\"8\" y=\"{yt}\" font-size=\"12\">1</text>\n\
         <text x=\"{xt}\" y=\"{yb}\" font-size=\"12\">R_max = {rmax}</text>\n\
         <polyline points=\"{pts}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n</svg>\n",
        y0 = num(y(0.0)),
        y1 = num(y(1.0)),
        x1 = num(x(profile.r_max)),
        yt = num(y(1.0) + 4.0),
        xt = num(x(profile.r_max) - 100.0),
        yb = num(h - 10.0),
        rmax = num(profile.r_max),
        pts = pts.join(" "),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axis::filtered_axis;

    #[test]
    fn view_box_is_the_bounding_ball() {
        let sc = SiteScene::two_site();
        let ax = filtered_axis(&sc, 0.75, 0.5).unwrap();
        let svg = Figure::new(&sc).axis(&ax, "red").render();
        assert!(svg.contains("viewBox=\"-10.000000 -10.000000 20.000000 20.000000\""));
        assert_eq!(svg.matches("<line").count(), 2);
    }
}
