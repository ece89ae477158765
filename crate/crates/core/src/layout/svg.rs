use std::fmt::Write as _;

use super::{Layout, Wall};

/// Drawing scale: one pixel is 5 cm.
pub const PX_PER_M: f64 = 20.0;
/// Thickness of the entrance marker, in meters.
const ENTRANCE_MARK: f64 = 0.3;

/// Formats a pixel coordinate with at most two decimals and no trailing zeros.
pub(crate) fn px(m: f64) -> String {
    let s = format!("{:.2}", m * PX_PER_M);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

pub(crate) fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub(crate) fn zone_fill(label: &str) -> &'static str {
    match label {
        "checkout" => "#f4d35e",
        "produce" => "#9bc53d",
        "dairy" => "#d8e2dc",
        "frozen" => "#a2d2ff",
        "beverages" => "#5bc0eb",
        "snacks" => "#fa7921",
        "bakery" => "#e9c46a",
        "household" => "#b8b8ff",
        "personal-care" => "#ffc8dd",
        "canned" => "#c9ada7",
        "condiments" => "#e76f51",
        _ => "#cccccc",
    }
}

/// Plan view of the zones, one labelled rectangle each, plus the entrance.
/// Plan y maps directly to SVG y.
pub fn render_layout_svg(layout: &Layout) -> String {
    let (w, d) = (layout.store.footprint.width, layout.store.footprint.depth);
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{1}" viewBox="0 0 {0} {1}">"#,
        px(w),
        px(d)
    )
    .unwrap();
    writeln!(
        s,
        r##"<rect class="footprint" x="0" y="0" width="{}" height="{}" fill="#ffffff" stroke="#333333"/>"##,
        px(w),
        px(d)
    )
    .unwrap();
    for z in &layout.zones {
        let r = &z.region;
        writeln!(
            s,
            r##"<rect class="zone" id="{}" x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="#333333"/>"##,
            escape(&z.id),
            px(r.x0),
            px(r.y0),
            px(r.width()),
            px(r.height()),
            zone_fill(&z.label)
        )
        .unwrap();
        let (cx, cy) = r.center();
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            px(cx),
            px(cy),
            escape(&z.label)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="middle">{:.2} x {:.2} m</text>"#,
            px(cx),
            px(cy + 0.8),
            r.width(),
            r.height()
        )
        .unwrap();
    }
    let e = layout.store.entrance_segment();
    let t = ENTRANCE_MARK;
    let (ex, ey, ew, eh) = match layout.store.entrance.wall {
        Wall::S => (e.x0, 0.0, e.width(), t),
        Wall::N => (e.x0, d - t, e.width(), t),
        Wall::W => (0.0, e.y0, t, e.height()),
        Wall::E => (w - t, e.y0, t, e.height()),
    };
    writeln!(
        s,
        r##"<rect class="entrance" x="{}" y="{}" width="{}" height="{}" fill="#2a9d8f"/>"##,
        px(ex),
        px(ey),
        px(ew),
        px(eh)
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}
