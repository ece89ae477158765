use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::f64::consts::SQRT_2;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canon::{to_canonical_string, write_atomic};
use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::placement::SceneGraph;

pub const DEFAULT_CELL_SIZE: f64 = 0.05;
pub const DEFAULT_ROBOT_RADIUS: f64 = 0.35;
pub const MAX_CELL_SIZE: f64 = 0.25;
/// Free border rasterized around the footprint so the entrance has an outside.
pub const GRID_MARGIN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub fn new(x: u32, y: u32) -> Self {
        Cell { x, y }
    }
}

/// Orthogonal and diagonal move counts; lengths are derived from these so
/// that equal routes always report bit-identical lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Steps {
    pub orth: u32,
    pub diag: u32,
}

impl Steps {
    pub fn cost(self) -> f64 {
        f64::from(self.orth) + f64::from(self.diag) * SQRT_2
    }

    pub fn meters(self, cell_size: f64) -> f64 {
        self.cost() * cell_size
    }

    /// Kind of the single move between two neighboring cells.
    pub fn between(a: Cell, b: Cell) -> Steps {
        if a.x != b.x && a.y != b.y {
            Steps { orth: 0, diag: 1 }
        } else if a == b {
            Steps::default()
        } else {
            Steps { orth: 1, diag: 0 }
        }
    }
}

impl std::ops::Add for Steps {
    type Output = Steps;

    fn add(self, o: Steps) -> Steps {
        Steps {
            orth: self.orth + o.orth,
            diag: self.diag + o.diag,
        }
    }
}

impl std::ops::AddAssign for Steps {
    fn add_assign(&mut self, o: Steps) {
        *self = *self + o;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub origin: (f64, f64),
    pub cell_size: f64,
    pub width: u32,
    pub height: u32,
    pub inflation_radius: f64,
    cells: Vec<bool>,
}

/// Grid metadata written next to the PGM image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub origin: [f64; 2],
    pub cell_size: f64,
    pub width: u32,
    pub height: u32,
    pub inflation_radius: f64,
    /// PGM rows run from y = origin upwards; black pixels are occupied.
    pub row_order: String,
}

impl OccupancyGrid {
    pub fn new(origin: (f64, f64), cell_size: f64, width: u32, height: u32) -> Result<Self> {
        if !(cell_size > 0.0) || width == 0 || height == 0 {
            return Err(Error::invalid("grid needs a positive cell size and extent"));
        }
        Ok(OccupancyGrid {
            origin,
            cell_size,
            width,
            height,
            inflation_radius: 0.0,
            cells: vec![false; width as usize * height as usize],
        })
    }

    /// Grid from rows of `#` (occupied) and `.` (free), first row at y = 0.
    pub fn from_ascii(rows: &[&str], cell_size: f64) -> Result<Self> {
        let h = rows.len() as u32;
        let w = rows.first().map_or(0, |r| r.len()) as u32;
        let mut g = OccupancyGrid::new((0.0, 0.0), cell_size, w, h)?;
        for (y, row) in rows.iter().enumerate() {
            if row.len() as u32 != w {
                return Err(Error::invalid("ragged grid rows"));
            }
            for (x, ch) in row.bytes().enumerate() {
                g.set(Cell::new(x as u32, y as u32), ch == b'#');
            }
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index(&self, c: Cell) -> usize {
        c.y as usize * self.width as usize + c.x as usize
    }

    pub fn cell_at(&self, i: usize) -> Cell {
        Cell::new((i % self.width as usize) as u32, (i / self.width as usize) as u32)
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn occupied(&self, c: Cell) -> bool {
        !self.in_bounds(c) || self.cells[self.index(c)]
    }

    pub fn free(&self, c: Cell) -> bool {
        !self.occupied(c)
    }

    pub fn set(&mut self, c: Cell, occupied: bool) {
        let i = self.index(c);
        self.cells[i] = occupied;
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&o| o).count()
    }

    pub fn cell_rect(&self, c: Cell) -> Rect {
        let s = self.cell_size;
        let x0 = self.origin.0 + f64::from(c.x) * s;
        let y0 = self.origin.1 + f64::from(c.y) * s;
        Rect::new(x0, y0, x0 + s, y0 + s)
    }

    pub fn cell_center(&self, c: Cell) -> (f64, f64) {
        self.cell_rect(c).center()
    }

    /// Cell containing a world point, if inside the grid.
    pub fn world_to_cell(&self, x: f64, y: f64) -> Option<Cell> {
        let fx = ((x - self.origin.0) / self.cell_size).floor();
        let fy = ((y - self.origin.1) / self.cell_size).floor();
        if fx < 0.0 || fy < 0.0 || fx >= f64::from(self.width) || fy >= f64::from(self.height) {
            return None;
        }
        Some(Cell::new(fx as u32, fy as u32))
    }

    /// Marks every cell whose square overlaps `r` with positive area.
    pub fn fill_rect(&mut self, r: &Rect) {
        let s = self.cell_size;
        let span = |lo: f64, hi: f64, o: f64, n: u32| {
            let a = ((lo - o) / s + 1e-9).floor().max(0.0);
            let b = ((hi - o) / s - 1e-9).ceil().min(f64::from(n));
            (a as u32, b.max(a) as u32)
        };
        let (x0, x1) = span(r.x0, r.x1, self.origin.0, self.width);
        let (y0, y1) = span(r.y0, r.y1, self.origin.1, self.height);
        for y in y0..y1 {
            for x in x0..x1 {
                self.set(Cell::new(x, y), true);
            }
        }
    }

    /// Up to eight neighbors reachable in one move without cutting a corner.
    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = (Cell, bool)> + '_ {
        const DIRS: [(i32, i32); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
        DIRS.iter().filter_map(move |&(dx, dy)| {
            let step = |dx: i32, dy: i32| {
                let x = i64::from(c.x) + i64::from(dx);
                let y = i64::from(c.y) + i64::from(dy);
                (x >= 0 && y >= 0)
                    .then(|| Cell::new(x as u32, y as u32))
                    .filter(|n| self.free(*n))
            };
            let n = step(dx, dy)?;
            let diagonal = dx != 0 && dy != 0;
            if diagonal && (step(dx, 0).is_none() || step(0, dy).is_none()) {
                return None;
            }
            Some((n, diagonal))
        })
    }

    pub fn sidecar(&self) -> GridSidecar {
        GridSidecar {
            origin: [self.origin.0, self.origin.1],
            cell_size: self.cell_size,
            width: self.width,
            height: self.height,
            inflation_radius: self.inflation_radius,
            row_order: "y-ascending".into(),
        }
    }

    /// Binary PGM (P5), one byte per cell.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.cells.iter().map(|&o| if o { 0u8 } else { 255u8 }));
        out
    }

    /// Writes `path` as PGM and a `.json` sidecar beside it.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_pgm())?;
        let mut side = Vec::new();
        writeln!(side, "{}", to_canonical_string(&self.sidecar()))?;
        write_atomic(&path.with_extension("json"), &side)
    }
}

/// Occupancy of a scene: every wall and facility footprint dilated by the
/// robot radius. Products sit inside their shelves and add nothing.
pub fn rasterize(scene: &SceneGraph, cell_size: f64, robot_radius: f64) -> Result<OccupancyGrid> {
    if !(cell_size > 0.0 && cell_size <= MAX_CELL_SIZE) {
        return Err(Error::invalid(format!(
            "cell_size must be in (0, {MAX_CELL_SIZE}], got {cell_size}"
        )));
    }
    if !(robot_radius >= 0.0) {
        return Err(Error::invalid(format!("robot_radius must be >= 0, got {robot_radius}")));
    }
    let fp = scene.layout.store.footprint_rect().inflate(GRID_MARGIN);
    let w = (fp.width() / cell_size - 1e-9).ceil() as u32;
    let h = (fp.height() / cell_size - 1e-9).ceil() as u32;
    let mut grid = OccupancyGrid::new((fp.x0, fp.y0), cell_size, w, h)?;
    grid.inflation_radius = robot_radius;
    for r in scene.obstacles() {
        grid.fill_rect(&r.inflate(robot_radius));
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPath {
    pub cells: Vec<Cell>,
    pub steps: Steps,
    pub length: f64,
}

#[derive(PartialEq)]
struct Open {
    f: f64,
    g: f64,
    i: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on f, deeper nodes first on ties, then index for determinism
        o.f.total_cmp(&self.f)
            .then(self.g.total_cmp(&o.g))
            .then(o.i.cmp(&self.i))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn octile(a: Cell, b: Cell) -> f64 {
    let dx = f64::from(a.x.abs_diff(b.x));
    let dy = f64::from(a.y.abs_diff(b.y));
    dx.max(dy) + (SQRT_2 - 1.0) * dx.min(dy)
}

/// Per-thread search buffers; entries are valid only where `stamp` equals
/// the current search generation, so nothing is cleared between searches.
#[derive(Default)]
struct Scratch {
    generation: u32,
    stamp: Vec<u32>,
    g: Vec<f64>,
    parent: Vec<u32>,
    closed: Vec<bool>,
}

impl Scratch {
    fn begin(&mut self, n: usize) {
        if self.stamp.len() != n || self.generation == u32::MAX {
            *self = Scratch {
                generation: 0,
                stamp: vec![0; n],
                g: vec![0.0; n],
                parent: vec![0; n],
                closed: vec![false; n],
            };
        }
        self.generation += 1;
    }

    fn g(&self, i: usize) -> f64 {
        if self.stamp[i] == self.generation {
            self.g[i]
        } else {
            f64::INFINITY
        }
    }

    fn closed(&self, i: usize) -> bool {
        self.stamp[i] == self.generation && self.closed[i]
    }

    fn set(&mut self, i: usize, g: f64, parent: u32) {
        self.stamp[i] = self.generation;
        self.g[i] = g;
        self.parent[i] = parent;
        self.closed[i] = false;
    }
}

thread_local! {
    static SCRATCH: std::cell::RefCell<Scratch> = std::cell::RefCell::new(Scratch::default());
}

/// Shortest 8-connected path without corner cutting, or `None` when the
/// goal cannot be reached or either end is blocked.
pub fn astar(grid: &OccupancyGrid, start: Cell, goal: Cell) -> Option<GridPath> {
    if grid.occupied(start) || grid.occupied(goal) {
        return None;
    }
    SCRATCH.with(|s| astar_in(grid, start, goal, &mut s.borrow_mut()))
}

fn astar_in(grid: &OccupancyGrid, start: Cell, goal: Cell, sc: &mut Scratch) -> Option<GridPath> {
    sc.begin(grid.len());
    let mut open = BinaryHeap::new();
    let (si, gi) = (grid.index(start), grid.index(goal));
    sc.set(si, 0.0, si as u32);
    open.push(Open {
        f: octile(start, goal),
        g: 0.0,
        i: si,
    });
    let mut found = false;
    while let Some(Open { g: gc, i, .. }) = open.pop() {
        if sc.closed(i) {
            continue;
        }
        sc.closed[i] = true;
        if i == gi {
            found = true;
            break;
        }
        let c = grid.cell_at(i);
        for (nb, diag) in grid.neighbors(c) {
            let j = grid.index(nb);
            if sc.closed(j) {
                continue;
            }
            let ng = gc + if diag { SQRT_2 } else { 1.0 };
            if ng < sc.g(j) {
                sc.set(j, ng, i as u32);
                open.push(Open {
                    f: ng + octile(nb, goal),
                    g: ng,
                    i: j,
                });
            }
        }
    }
    if !found {
        return None;
    }
    let mut cells = vec![goal];
    let mut i = gi;
    while i != si {
        i = sc.parent[i] as usize;
        cells.push(grid.cell_at(i));
    }
    cells.reverse();
    Some(path_from_cells(cells, grid.cell_size))
}

pub(crate) fn path_from_cells(cells: Vec<Cell>, cell_size: f64) -> GridPath {
    let steps = cells
        .windows(2)
        .fold(Steps::default(), |s, w| s + Steps::between(w[0], w[1]));
    GridPath {
        length: steps.meters(cell_size),
        cells,
        steps,
    }
}

/// Membership mask of the 8-connected free component of `start`.
pub fn reachable_mask(grid: &OccupancyGrid, start: Cell) -> Vec<bool> {
    let mut seen = vec![false; grid.len()];
    if grid.occupied(start) {
        return seen;
    }
    let mut queue = VecDeque::from([start]);
    seen[grid.index(start)] = true;
    while let Some(c) = queue.pop_front() {
        for (nb, _) in grid.neighbors(c) {
            let j = grid.index(nb);
            if !seen[j] {
                seen[j] = true;
                queue.push_back(nb);
            }
        }
    }
    seen
}

/// Cells of the free component of `start`, in row-major order.
pub fn reachable_set(grid: &OccupancyGrid, start: Cell) -> Vec<Cell> {
    reachable_mask(grid, start)
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| grid.cell_at(i))
        .collect()
}
