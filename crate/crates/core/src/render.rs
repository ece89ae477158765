//! Top-down SVG of a whole scene.

use std::fmt::Write as _;

use crate::layout::{escape, px, zone_fill, Wall};
use crate::nav::{Cell, OccupancyGrid};
use crate::placement::SceneGraph;
use crate::tasks::front_face;

#[derive(Debug, Clone, Copy, Default)]
pub struct SceneSvgOptions<'a> {
    /// Dot at the aisle face of every front-facing product.
    pub show_products: bool,
    /// Overlay of occupied grid cells.
    pub grid: Option<&'a OccupancyGrid>,
}

const ENTRANCE_MARK: f64 = 0.3;

fn rect(s: &mut String, class: &str, id: Option<&str>, r: &crate::geom::Rect, style: &str) {
    let id = id.map(|i| format!(r#" id="{}""#, escape(i))).unwrap_or_default();
    writeln!(
        s,
        r#"<rect class="{class}"{id} x="{}" y="{}" width="{}" height="{}" {style}/>"#,
        px(r.x0),
        px(r.y0),
        px(r.width()),
        px(r.height())
    )
    .unwrap();
}

/// Plan view at the layout scale; world y maps directly to SVG y.
pub fn render_scene_svg(scene: &SceneGraph, opts: &SceneSvgOptions) -> String {
    let store = &scene.layout.store;
    let (w, d) = (store.footprint.width, store.footprint.depth);
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{1}" viewBox="0 0 {0} {1}">"#,
        px(w),
        px(d)
    )
    .unwrap();
    for z in &scene.layout.zones {
        rect(
            &mut s,
            "zone",
            Some(&z.id),
            &z.region,
            &format!(r#"fill="{}""#, zone_fill(&z.label)),
        );
    }
    for wall in &scene.walls {
        rect(
            &mut s,
            "wall",
            Some(&wall.id),
            &wall.bounds.plan(),
            r##"fill="#333333""##,
        );
    }
    for p in &scene.placed {
        rect(
            &mut s,
            "facility",
            Some(&p.instance_id),
            &p.footprint(),
            r##"fill="none" stroke="#222222" stroke-width="1""##,
        );
    }
    for b in &scene.basket_zones {
        rect(
            &mut s,
            "basket",
            Some(&b.basket_id),
            &b.bounds.plan(),
            r##"fill="#8d99ae""##,
        );
    }
    let e = store.entrance_segment();
    let t = ENTRANCE_MARK;
    let mark = match store.entrance.wall {
        Wall::S => crate::geom::Rect::from_size(e.x0, 0.0, e.width(), t),
        Wall::N => crate::geom::Rect::from_size(e.x0, d - t, e.width(), t),
        Wall::W => crate::geom::Rect::from_size(0.0, e.y0, t, e.height()),
        Wall::E => crate::geom::Rect::from_size(w - t, e.y0, t, e.height()),
    };
    rect(&mut s, "entrance", None, &mark, r##"fill="#2a9d8f""##);
    if opts.show_products {
        for p in scene.products.iter().filter(|p| p.front_facing) {
            let ((x, y), _) = front_face(p);
            writeln!(
                s,
                r##"<circle class="product" cx="{}" cy="{}" r="1" fill="#d62828"/>"##,
                px(x),
                px(y)
            )
            .unwrap();
        }
    }
    if let Some(g) = opts.grid {
        // one rectangle per horizontal run of occupied cells
        for y in 0..g.height {
            let mut x = 0;
            while x < g.width {
                if !g.occupied(Cell::new(x, y)) {
                    x += 1;
                    continue;
                }
                let x0 = x;
                while x < g.width && g.occupied(Cell::new(x, y)) {
                    x += 1;
                }
                let mut r = g.cell_rect(Cell::new(x0, y));
                r.x1 = g.cell_rect(Cell::new(x - 1, y)).x1;
                rect(&mut s, "occupied", None, &r, r##"fill="#000000" fill-opacity="0.25""##);
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::synth_catalog;
    use crate::layout::StoreSpec;
    use crate::placement::generate_scene;

    #[test]
    fn one_element_per_zone_and_facility() {
        let cat = synth_catalog(2, 200, 20).unwrap();
        let scene = generate_scene(&StoreSpec::default_store(2), &cat).unwrap();
        let svg = render_scene_svg(&scene, &SceneSvgOptions::default());
        assert_eq!(svg.matches(r#"class="zone""#).count(), scene.layout.zones.len());
        assert_eq!(svg.matches(r#"class="facility""#).count(), scene.placed.len());
        assert_eq!(svg, render_scene_svg(&scene, &SceneSvgOptions::default()));
        // entrance at offset 3 m, 2 m wide, on the south wall
        assert!(svg.contains(r#"<rect class="entrance" x="60" y="0" width="40" height="6""#));
    }
}
