use super::MetricError;

/// How the context-aware score treats embedding magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContextMode {
    /// `unit(d)·c + d·(unit(i) − unit(c))`: only the operands written with a
    /// bar in the original formula are normalized.
    Literal,
    /// `unit(d)·unit(c) + unit(d)·(unit(i) − unit(c))`.
    FullyNormalized,
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum()
}

fn norm(a: &[f32]) -> Result<f64, MetricError> {
    let n = libm::sqrt(dot(a, a));
    if n > 0.0 && n.is_finite() {
        Ok(n)
    } else {
        Err(MetricError::DegenerateVector)
    }
}

fn same_dim(a: &[f32], b: &[f32]) -> Result<(), MetricError> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(MetricError::ShapeMismatch {
            left: a.len(),
            right: b.len(),
        })
    }
}

/// Cosine similarity of two non-zero vectors.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64, MetricError> {
    same_dim(a, b)?;
    let c = dot(a, b) / (norm(a)? * norm(b)?);
    Ok(c.clamp(-1.0, 1.0))
}

/// `scale * max(cos(image, description), 0)`.
///
/// The unscaled form (`scale = 1`) is the plain clipped cosine; the original
/// CLIPScore uses `scale = 2.5`.
pub fn clipscore(image: &[f32], description: &[f32], scale: f64) -> Result<f64, MetricError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(MetricError::InvalidScale);
    }
    Ok(scale * cosine(image, description)?.max(0.0))
}

/// Context-aware CLIPScore: similarity of the description to its context plus
/// how well the description covers what the image adds to that context.
pub fn contextual_clipscore(
    description: &[f32],
    context: &[f32],
    image: &[f32],
    mode: ContextMode,
) -> Result<f64, MetricError> {
    same_dim(description, context)?;
    same_dim(description, image)?;
    let nd = norm(description)?;
    let nc = norm(context)?;
    let ni = norm(image)?;
    // d·(i/|i| - c/|c|)
    let residual = dot(description, image) / ni - dot(description, context) / nc;
    let score = match mode {
        ContextMode::Literal => dot(description, context) / nd + residual,
        ContextMode::FullyNormalized => dot(description, context) / (nd * nc) + residual / nd,
    };
    Ok(score)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn cosine_errors() {
        assert_eq!(
            cosine(&[0.0, 0.0], &[1.0, 0.0]),
            Err(MetricError::DegenerateVector)
        );
        assert_eq!(
            cosine(&[1.0], &[1.0, 0.0]),
            Err(MetricError::ShapeMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn clipscore_examples() {
        assert_eq!(clipscore(&[1.0, 0.0], &[-1.0, 0.0], 1.0).unwrap(), 0.0);
        assert!((clipscore(&[3.0, 4.0], &[3.0, 4.0], 2.5).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(
            clipscore(&[1.0], &[1.0], 0.0),
            Err(MetricError::InvalidScale)
        );
    }

    #[test]
    fn contextual_examples() {
        let v = contextual_clipscore(
            &[1.0, 0.0],
            &[0.0, 1.0],
            &[1.0, 0.0],
            ContextMode::FullyNormalized,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        let v = contextual_clipscore(&[0.0, 2.0], &[0.0, 1.0], &[0.0, 1.0], ContextMode::Literal)
            .unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        // context == image (unit): residual vanishes, literal gives unit(d)·c
        let d = [0.3f32, -2.0, 0.5];
        let c = [0.6f32, 0.8, 0.0];
        let v = contextual_clipscore(&d, &c, &c, ContextMode::Literal).unwrap();
        assert!((v - cosine(&d, &c).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn contextual_errors() {
        assert_eq!(
            contextual_clipscore(&[1.0], &[0.0], &[1.0], ContextMode::Literal),
            Err(MetricError::DegenerateVector)
        );
        assert!(matches!(
            contextual_clipscore(&[1.0], &[1.0, 0.0], &[1.0], ContextMode::Literal),
            Err(MetricError::ShapeMismatch { .. })
        ));
    }
}
