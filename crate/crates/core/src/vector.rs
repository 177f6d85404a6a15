use std::ops::{Index, IndexMut};

use crate::scalar::Scalar;

/// Dense real vector, the ambient-space element.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Vector<T> {
    data: Vec<T>,
}

impl<T: Scalar> Vector<T> {
    pub fn new(data: Vec<T>) -> Self {
        Vector { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Vector {
            data: vec![T::zero(); dim],
        }
    }

    /// Standard basis vector e_i (0-based coordinate).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[i] = T::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn add(&self, other: &Self) -> Self {
        Vector::new(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Vector::new(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| a - b)
                .collect(),
        )
    }

    pub fn scaled(&self, s: T) -> Self {
        Vector::new(self.data.iter().map(|&a| a * s).collect())
    }

    /// self += alpha * other
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += alpha * b;
        }
    }

    pub fn dist(&self, other: &Self) -> T {
        self.sub(other).norm()
    }

    /// None when the norm is below machine noise.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n > T::epsilon() * crate::scalar::real::<T>(16.0) {
            Some(self.scaled(T::one() / n))
        } else {
            None
        }
    }

    pub fn is_all_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| *a == T::zero())
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.data[i]
    }
}

impl<T> IndexMut<usize> for Vector<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.data[i]
    }
}

impl<T: Scalar> From<Vec<T>> for Vector<T> {
    fn from(data: Vec<T>) -> Self {
        Vector::new(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_and_norm() {
        let a: Vector<f64> = vec![3.0, 4.0].into();
        let b: Vector<f64> = vec![1.0, 0.0].into();
        assert_eq!(a.dot(&b), 3.0);
        assert_eq!(a.norm(), 5.0);
        assert_eq!(a.sub(&b).as_slice(), &[2.0, 4.0]);
    }

    #[test]
    fn normalized_zero_is_none() {
        let z: Vector<f64> = Vector::zeros(3);
        assert!(z.normalized().is_none());
    }
}
