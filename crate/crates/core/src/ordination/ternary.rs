use crate::composition::CompositionMatrix;
use crate::error::{CodaError, Result};
use crate::linalg::Matrix;
use crate::scalar::{lit, Scalar};

/// Cartesian coordinates of a three-part composition in the equilateral
/// triangle with vertices `(0,0)`, `(1,0)` and `(1/2, √3/2)` for parts one, two
/// and three. Rows are closed to one first.
pub fn ternary_coords<T: Scalar>(m: &CompositionMatrix<T>) -> Result<Matrix<T>> {
    if m.n_parts() != 3 {
        return Err(CodaError::Shape(format!(
            "ternary coordinates need exactly 3 parts, got {}",
            m.n_parts()
        )));
    }
    let closed = m.close(T::one())?;
    let half = lit::<T>(0.5);
    let height = lit::<T>(3.0).sqrt() * half;
    let mut out = Matrix::zeros(m.n_samples(), 2);
    for (i, row) in closed.values().rows().enumerate() {
        out.set(i, 0, row[1] + half * row[2]);
        out.set(i, 1, height * row[2]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(rows: &[Vec<f64>]) -> Matrix<f64> {
        ternary_coords(&CompositionMatrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn vertices_and_centroid() {
        let c = coords(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0],
        ]);
        assert_eq!(c.row(0), &[0.0, 0.0]);
        assert_eq!(c.row(1), &[1.0, 0.0]);
        assert!((c.get(2, 0) - 0.5).abs() < 1e-15 && (c.get(2, 1) - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((c.get(3, 0) - 0.5).abs() < 1e-15 && (c.get(3, 1) - 3f64.sqrt() / 6.0).abs() < 1e-15);
    }

    #[test]
    fn cyclic_permutation_rotates_triangle() {
        // rotating parts (a,b,c) -> (c,a,b) maps the point by a 120° rotation
        // about the centroid
        let row = vec![0.2, 0.3, 0.5];
        let rotated = vec![0.5, 0.2, 0.3];
        let c = coords(&[row, rotated]);
        let centroid = (0.5, 3f64.sqrt() / 6.0);
        let (x, y) = (c.get(0, 0) - centroid.0, c.get(0, 1) - centroid.1);
        let angle = 2.0 * std::f64::consts::PI / 3.0;
        let expect = (x * angle.cos() - y * angle.sin(), x * angle.sin() + y * angle.cos());
        assert!((c.get(1, 0) - centroid.0 - expect.0).abs() < 1e-12);
        assert!((c.get(1, 1) - centroid.1 - expect.1).abs() < 1e-12);
    }

    #[test]
    fn requires_three_parts() {
        let m = CompositionMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(ternary_coords(&m), Err(CodaError::Shape(_))));
    }
}
