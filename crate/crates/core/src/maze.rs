//! Per-task solution spaces.
//!
//! A maze is a grid of open/blocked cells with 4-adjacency. Generation is an
//! iterative recursive backtracker that only opens a cell when it would touch
//! exactly one open cell, so the open cells always form a spanning tree and
//! every pair of open cells is connected by a unique path.

use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::{self, Stream};
use crate::taskgraph::TaskId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Cell { x, y }
    }

    pub fn is_adjacent(self, other: Cell) -> bool {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y) == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Maze {
    width: usize,
    height: usize,
    open: Vec<bool>,
    start: Cell,
    target: Cell,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub task_id: TaskId,
    pub path: Vec<Cell>,
    pub steps_explored: u64,
}

impl Maze {
    /// Builds a maze from explicit parts. Start and target must be open.
    pub fn from_parts(
        width: usize,
        height: usize,
        open: Vec<bool>,
        start: Cell,
        target: Cell,
    ) -> Result<Self> {
        if open.len() != width * height {
            return Err(Error::invalid("open-cell mask does not match dimensions"));
        }
        let maze = Maze {
            width,
            height,
            open,
            start,
            target,
        };
        if !maze.is_open(start) || !maze.is_open(target) {
            return Err(Error::invalid("start and target must be open cells"));
        }
        Ok(maze)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn start(&self) -> Cell {
        self.start
    }

    pub fn target(&self) -> Cell {
        self.target
    }

    pub fn open_cells(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    pub fn is_open(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height && self.open[self.idx(c)]
    }

    fn idx(&self, c: Cell) -> usize {
        c.y * self.width + c.x
    }

    fn neighbours(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        let (w, h) = (self.width, self.height);
        [
            (c.x > 0).then(|| Cell::new(c.x - 1, c.y)),
            (c.x + 1 < w).then(|| Cell::new(c.x + 1, c.y)),
            (c.y > 0).then(|| Cell::new(c.x, c.y - 1)),
            (c.y + 1 < h).then(|| Cell::new(c.x, c.y + 1)),
        ]
        .into_iter()
        .flatten()
    }
}

pub fn generate_maze(width: usize, height: usize, seed: u64) -> Result<Maze> {
    if width < 2 || height < 2 {
        return Err(Error::invalid(format!(
            "maze must be at least 2x2, got {width}x{height}"
        )));
    }
    let mut rng = seed::rng(seed, Stream::Maze, &[width as u64, height as u64]);
    let mut maze = Maze {
        width,
        height,
        open: vec![false; width * height],
        start: Cell::new(0, 0),
        target: Cell::new(0, 0),
    };
    let origin = Cell::new(rng.random_range(0..width), rng.random_range(0..height));
    let i = maze.idx(origin);
    maze.open[i] = true;
    let mut stack = vec![origin];
    let mut candidates = Vec::with_capacity(4);
    while let Some(&cur) = stack.last() {
        candidates.clear();
        candidates.extend(maze.neighbours(cur).filter(|&n| {
            !maze.is_open(n) && maze.neighbours(n).all(|nn| nn == cur || !maze.is_open(nn))
        }));
        match candidates.choose(&mut rng) {
            Some(&next) => {
                let i = maze.idx(next);
                maze.open[i] = true;
                stack.push(next);
            }
            None => {
                stack.pop();
            }
        }
    }

    let open: Vec<Cell> = (0..height)
        .flat_map(|y| (0..width).map(move |x| Cell::new(x, y)))
        .filter(|&c| maze.is_open(c))
        .collect();
    let picks: Vec<&Cell> = open.choose_multiple(&mut rng, 2).collect();
    maze.start = *picks[0];
    maze.target = *picks[1];
    Ok(maze)
}

/// Randomised depth-first search from start to target. `steps_explored`
/// counts distinct cells visited, so the duration never exceeds
/// `open_cells / speed`.
pub fn explore(maze: &Maze, task: TaskId, speed: f64, seed: u64) -> Result<(Solution, f64)> {
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(Error::invalid(format!("speed must be positive, got {speed}")));
    }
    let solution = search(maze, task, seed);
    let duration = solution.steps_explored as f64 / speed;
    Ok((solution, duration))
}

fn search(maze: &Maze, task: TaskId, seed: u64) -> Solution {
    let mut rng = seed::rng(seed, Stream::Explore, &[]);
    let mut visited = vec![false; maze.width * maze.height];
    visited[maze.idx(maze.start)] = true;
    let mut steps = 1u64;
    // Each frame holds a cell and its not-yet-tried neighbours in random order.
    let mut stack: Vec<(Cell, Vec<Cell>)> = Vec::new();
    let frame = |c: Cell, rng: &mut rand_chacha::ChaCha8Rng| {
        let mut ns: Vec<Cell> = maze.neighbours(c).filter(|&n| maze.is_open(n)).collect();
        ns.shuffle(rng);
        (c, ns)
    };
    stack.push(frame(maze.start, &mut rng));
    while let Some((cur, pending)) = stack.last_mut() {
        if *cur == maze.target {
            break;
        }
        match pending.pop() {
            Some(next) => {
                let i = maze.idx(next);
                if !visited[i] {
                    visited[i] = true;
                    steps += 1;
                    let f = frame(next, &mut rng);
                    stack.push(f);
                }
            }
            None => {
                stack.pop();
            }
        }
    }
    Solution {
        task_id: task,
        path: stack.into_iter().map(|(c, _)| c).collect(),
        steps_explored: steps,
    }
}

/// Checks a path against the maze. An empty path is accepted only when the
/// start is also the target.
pub fn validate_solution(maze: &Maze, solution: &Solution) -> bool {
    let path = &solution.path;
    let (Some(&first), Some(&last)) = (path.first(), path.last()) else {
        return maze.start == maze.target;
    };
    first == maze.start
        && last == maze.target
        && path.iter().all(|&c| maze.is_open(c))
        && path.windows(2).all(|w| w[0].is_adjacent(w[1]))
}

impl fmt::Display for Maze {
    /// `#` wall, `.` open, `S` start, `T` target.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for y in 0..self.height {
            for x in 0..self.width {
                let c = Cell::new(x, y);
                let ch = if c == self.start {
                    'S'
                } else if c == self.target {
                    'T'
                } else if self.is_open(c) {
                    '.'
                } else {
                    '#'
                };
                write!(f, "{ch}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for Maze {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rows: Vec<&str> = s.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut open = Vec::with_capacity(width * height);
        let (mut start, mut target) = (None, None);
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::Parse {
                    line: y + 1,
                    message: "ragged maze row".into(),
                });
            }
            for (x, ch) in row.chars().enumerate() {
                let c = Cell::new(x, y);
                match ch {
                    '#' => open.push(false),
                    '.' => open.push(true),
                    'S' => {
                        start = Some(c);
                        open.push(true);
                    }
                    'T' => {
                        target = Some(c);
                        open.push(true);
                    }
                    'X' => {
                        start = Some(c);
                        target = Some(c);
                        open.push(true);
                    }
                    other => {
                        return Err(Error::Parse {
                            line: y + 1,
                            message: format!("unexpected maze character `{other}`"),
                        })
                    }
                }
            }
        }
        let (Some(start), Some(target)) = (start, target) else {
            return Err(Error::Parse {
                line: 0,
                message: "maze needs an S and a T (or X for both)".into(),
            });
        };
        Maze::from_parts(width, height, open, start, target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Unique tree path by breadth-first search; independent of `search`.
    fn bfs_path(maze: &Maze) -> Option<Vec<Cell>> {
        use std::collections::{HashMap, VecDeque};
        let mut prev = HashMap::new();
        let mut queue = VecDeque::from([maze.start]);
        prev.insert(maze.start, maze.start);
        while let Some(c) = queue.pop_front() {
            if c == maze.target {
                let mut path = vec![c];
                let mut cur = c;
                while cur != maze.start {
                    cur = prev[&cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for n in maze.neighbours(c).filter(|&n| maze.is_open(n)) {
                prev.entry(n).or_insert_with(|| {
                    queue.push_back(n);
                    c
                });
            }
        }
        None
    }

    #[test]
    fn minimum_maze_is_solvable() {
        for seed in 0..50 {
            let m = generate_maze(2, 2, seed).unwrap();
            assert_ne!(m.start(), m.target());
            assert!(bfs_path(&m).is_some());
        }
    }

    #[test]
    fn rejects_tiny_dimensions() {
        assert!(matches!(generate_maze(1, 5, 0), Err(Error::InvalidParam(_))));
        assert!(matches!(generate_maze(5, 1, 0), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn open_cells_form_a_tree() {
        for seed in 0..10 {
            let m = generate_maze(17, 9, seed).unwrap();
            let open = m.open_cells();
            let mut edges = 0;
            for y in 0..m.height() {
                for x in 0..m.width() {
                    let c = Cell::new(x, y);
                    if m.is_open(c) {
                        edges += m.neighbours(c).filter(|&n| m.is_open(n)).count();
                    }
                }
            }
            assert_eq!(edges / 2, open - 1);
        }
    }

    #[test]
    fn largest_experiment_size() {
        let m = generate_maze(400, 400, 1).unwrap();
        assert_eq!((m.width(), m.height()), (400, 400));
        let (sol, _) = explore(&m, TaskId(0), 1.0, 1).unwrap();
        assert!(validate_solution(&m, &sol));
        assert_eq!(Some(sol.path), bfs_path(&m));
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_maze(31, 23, 5).unwrap(), generate_maze(31, 23, 5).unwrap());
        assert_ne!(generate_maze(31, 23, 5).unwrap(), generate_maze(31, 23, 6).unwrap());
    }

    #[test]
    fn neighbour_target_bounded_by_open_cells() {
        let m: Maze = "
            ##.##
            ..ST.
            #.#.#
        "
        .parse()
        .unwrap();
        for seed in 0..20 {
            let (sol, duration) = explore(&m, TaskId(0), 1.0, seed).unwrap();
            assert!(duration <= m.open_cells() as f64);
            assert_eq!(sol.path, [Cell::new(2, 1), Cell::new(3, 1)]);
        }
    }

    #[test]
    fn speed_only_scales_time() {
        let m = generate_maze(40, 40, 3).unwrap();
        let (a, da) = explore(&m, TaskId(1), 1.0, 8).unwrap();
        let (b, db) = explore(&m, TaskId(1), 2.0, 8).unwrap();
        assert_eq!(a, b);
        assert_eq!(db, da / 2.0);
        assert!(explore(&m, TaskId(1), 0.0, 8).is_err());
    }

    #[test]
    fn dfs_visits_bounded() {
        let mut total = 0u64;
        for seed in 0..100 {
            let m = generate_maze(50, 50, seed).unwrap();
            let (sol, _) = explore(&m, TaskId(0), 1.0, seed).unwrap();
            assert!(sol.steps_explored as usize <= m.open_cells());
            assert!(sol.steps_explored as usize >= sol.path.len() - 1);
            total += sol.steps_explored;
        }
        assert!((total as f64 / 100.0) < 2500.0 * 2.0);
    }

    #[test]
    fn validation_cases() {
        let m = generate_maze(12, 12, 4).unwrap();
        let (sol, _) = explore(&m, TaskId(0), 1.0, 4).unwrap();
        assert!(validate_solution(&m, &sol));

        let blocked = (0..12)
            .flat_map(|y| (0..12).map(move |x| Cell::new(x, y)))
            .find(|&c| !m.is_open(c))
            .unwrap();
        let mut broken = sol.clone();
        if broken.path.len() > 2 {
            broken.path[1] = blocked;
        } else {
            broken.path.push(blocked);
        }
        assert!(!validate_solution(&m, &broken));

        let mut empty = sol.clone();
        empty.path.clear();
        assert!(!validate_solution(&m, &empty));

        let same: Maze = "#X\n..".parse().unwrap();
        let nothing = Solution { task_id: TaskId(0), path: vec![], steps_explored: 0 };
        assert!(validate_solution(&same, &nothing));
    }

    #[test]
    fn text_dump_round_trips() {
        let m = generate_maze(9, 7, 2).unwrap();
        let again: Maze = m.to_string().parse().unwrap();
        assert_eq!(m, again);
    }
}
