use super::BinaryMask;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    pub fn from_neighbours(n: u32) -> Option<Self> {
        match n {
            4 => Some(Connectivity::Four),
            8 => Some(Connectivity::Eight),
            _ => None,
        }
    }

    pub fn neighbours(self) -> u32 {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }

    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(-1, 0), (0, -1), (0, 1), (1, 0)],
            Connectivity::Eight => &[
                (-1, -1),
                (-1, 0),
                (-1, 1),
                (0, -1),
                (0, 1),
                (1, -1),
                (1, 0),
                (1, 1),
            ],
        }
    }
}

/// Labels foreground components in raster order of their first pixel.
///
/// Returns per-pixel labels (0 = background, components numbered from 1)
/// and the pixel area of each component, indexed by `label - 1`.
pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> (Vec<u32>, Vec<usize>) {
    let (rows, cols) = (mask.rows(), mask.cols());
    let src = mask.as_slice();
    let mut labels = vec![0u32; src.len()];
    let mut areas = Vec::new();
    let mut stack = Vec::new();

    for start in 0..src.len() {
        if !src[start] || labels[start] != 0 {
            continue;
        }
        let label = areas.len() as u32 + 1;
        let mut area = 0usize;
        labels[start] = label;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            area += 1;
            let (r, c) = ((idx / cols) as isize, (idx % cols) as isize);
            for &(dr, dc) in connectivity.offsets() {
                let (nr, nc) = (r + dr, c + dc);
                if nr < 0 || nc < 0 || nr >= rows as isize || nc >= cols as isize {
                    continue;
                }
                let n = nr as usize * cols + nc as usize;
                if src[n] && labels[n] == 0 {
                    labels[n] = label;
                    stack.push(n);
                }
            }
        }
        areas.push(area);
    }
    (labels, areas)
}

/// Keeps only components whose pixel area strictly exceeds
/// `min_region_frac * rows * cols`.
pub fn filter_components(
    mask: &BinaryMask,
    min_region_frac: f64,
    connectivity: Connectivity,
) -> BinaryMask {
    if !mask.any() {
        return mask.clone();
    }
    let bound = min_region_frac * (mask.rows() * mask.cols()) as f64;
    let (labels, areas) = label_components(mask, connectivity);
    let keep: Vec<bool> = areas.iter().map(|&a| a as f64 > bound).collect();
    let data = labels
        .iter()
        .map(|&l| l != 0 && keep[l as usize - 1])
        .collect();
    BinaryMask::from_vec(mask.rows(), mask.cols(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(rows: usize, cols: usize, count: usize) -> BinaryMask {
        // A compact blob of exactly `count` pixels starting at (10, 10).
        let width = 50;
        BinaryMask::from_fn(rows, cols, |r, c| {
            r >= 10 && c >= 10 && c < 10 + width && (r - 10) * width + (c - 10) < count
        })
    }

    #[test]
    fn area_bound_is_strict() {
        // 0.01 * 512 * 512 = 2621.44
        let small = block(512, 512, 2000);
        assert_eq!(small.count(), 2000);
        assert!(!filter_components(&small, 0.01, Connectivity::Eight).any());

        let large = block(512, 512, 3000);
        assert_eq!(filter_components(&large, 0.01, Connectivity::Eight), large);

        let empty = BinaryMask::new(512, 512);
        assert_eq!(filter_components(&empty, 0.01, Connectivity::Eight), empty);

        let exact = block(100, 100, 200);
        assert!(!filter_components(&exact, 0.02, Connectivity::Eight).any());
        let above = block(100, 100, 201);
        assert!(filter_components(&above, 0.02, Connectivity::Eight).any());
    }

    #[test]
    fn diagonal_pixels_depend_on_connectivity() {
        let m = BinaryMask::from_fn(4, 4, |r, c| r == c);
        let (_, four) = label_components(&m, Connectivity::Four);
        let (_, eight) = label_components(&m, Connectivity::Eight);
        assert_eq!(four, vec![1, 1, 1, 1]);
        assert_eq!(eight, vec![4]);
    }
}
