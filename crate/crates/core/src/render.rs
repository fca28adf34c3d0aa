//! SVG drawings of concrete scenes.

use std::fmt::Write;

use crate::geometry::Point;
use crate::mapping::{ConcreteScene, GeometryParams};
use crate::roadmap::RoadMap;

/// Pixels per map unit.
pub const SCALE: f64 = 2.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RenderOptions {
    pub fov: bool,
    pub labels: bool,
}

struct Canvas {
    height: f64,
}

impl Canvas {
    fn xy(&self, p: Point) -> String {
        format!("{:.2},{:.2}", p.x * SCALE, (self.height - p.y) * SCALE)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Draw the map, each actor as a rectangle with a heading arrow and, on
/// request, field-of-view sectors and id labels. The y axis points up in map
/// coordinates; output is byte-identical for identical input.
pub fn render_svg(scene: &ConcreteScene, map: &RoadMap, params: &GeometryParams, opts: RenderOptions) -> String {
    let c = Canvas { height: map.height };
    let mut s = String::new();
    let (w, h) = (map.width * SCALE, map.height * SCALE);
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}">"#
    )
    .unwrap();
    writeln!(s, r##"<rect width="{w:.2}" height="{h:.2}" fill="#ffffff"/>"##).unwrap();
    for road in &map.roads {
        let pts: Vec<String> = road.polygon.vertices().iter().map(|p| c.xy(*p)).collect();
        writeln!(
            s,
            r##"<polygon id="road-{}" points="{}" fill="#bdbdbd" stroke="#9e9e9e" stroke-width="0.5"/>"##,
            escape(&road.id),
            pts.join(" ")
        )
        .unwrap();
    }
    for (i, a) in scene.actors.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let id = escape(&a.id);
        if opts.fov {
            let f = a.fov(params);
            let p1 = f.apex.offset(f.center_angle - f.half_angle, f.radius);
            let p2 = f.apex.offset(f.center_angle + f.half_angle, f.radius);
            let large = u8::from(2.0 * f.half_angle > std::f64::consts::PI);
            let r = f.radius * SCALE;
            writeln!(
                s,
                r#"<path id="fov-{id}" d="M{} L{} A{r:.2},{r:.2} 0 {large} 0 {} Z" fill="{color}" fill-opacity="0.12" stroke="{color}" stroke-opacity="0.4"/>"#,
                c.xy(f.apex),
                c.xy(p1),
                c.xy(p2)
            )
            .unwrap();
        }
        let corners = a.rect().outline();
        let d: Vec<String> = corners.iter().map(|p| c.xy(*p)).collect();
        writeln!(
            s,
            r##"<path id="actor-{id}" d="M{} L{} L{} L{} Z" fill="{color}" stroke="#000000" stroke-width="0.5"/>"##,
            d[0], d[1], d[2], d[3]
        )
        .unwrap();
        let center = a.center();
        let tip = center.offset(a.h, a.l / 2.0 + 2.0);
        let left = center.offset(a.h + 0.5, a.l / 2.0);
        let right = center.offset(a.h - 0.5, a.l / 2.0);
        writeln!(
            s,
            r##"<path id="heading-{id}" d="M{} L{} M{} L{} L{}" fill="none" stroke="#000000" stroke-width="1"/>"##,
            c.xy(center),
            c.xy(tip),
            c.xy(left),
            c.xy(tip),
            c.xy(right)
        )
        .unwrap();
        if opts.labels {
            let at = c.xy(Point::new(center.x + a.w.max(a.l) / 2.0 + 1.0, center.y));
            let (x, y) = at.split_once(',').unwrap();
            writeln!(s, r##"<text x="{x}" y="{y}" font-family="sans-serif" font-size="10" fill="#000000">{id}</text>"##).unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::tests::actor;

    fn scene() -> (ConcreteScene, RoadMap) {
        let map = RoadMap::bundled("strip").unwrap();
        let s = ConcreteScene {
            map: "strip".into(),
            actors: vec![actor("a", 20.0, 17.5, 0.0), actor("b<", 40.0, 22.5, std::f64::consts::PI)],
        };
        (s, map)
    }

    #[test]
    fn output_is_deterministic_and_well_formed() {
        let (s, map) = scene();
        let opts = RenderOptions { fov: true, labels: true };
        let a = render_svg(&s, &map, &GeometryParams::default(), opts);
        let b = render_svg(&s, &map, &GeometryParams::default(), opts);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<polygon").count(), map.roads.len());
        assert_eq!(a.matches("id=\"actor-").count(), 2);
        assert_eq!(a.matches("id=\"fov-").count(), 2);
        assert!(a.contains("b&lt;"));
        assert!(a.contains(r#"width="400.00" height="80.00""#));
    }

    #[test]
    fn y_axis_is_flipped() {
        let (s, map) = scene();
        let svg = render_svg(&s, &map, &GeometryParams::default(), RenderOptions { fov: false, labels: false });
        // actor a spans x 17.75..22.25 and y 16.5..18.5 in map units
        let line = svg.lines().find(|l| l.contains("actor-a")).unwrap();
        assert!(line.contains("35.50,47.00") || line.contains("44.50,47.00"));
        assert!(!svg.contains("<text"));
        assert!(!svg.contains("fov-"));
    }
}
