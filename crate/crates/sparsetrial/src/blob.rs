//! Binary SVM model blob.
//!
//! Layout, all little-endian: `SVM1`, kernel tag (u8: 0 rbf, 1 linear),
//! gamma, c, tol (f64), max_passes (u64), negative and positive label (i32),
//! support-vector count and dimension (u64), iterations (u64), converged (u8),
//! bias (f64), dual coefficients, then support vectors row by row (f64).

use sparsetrial_core::svm::{Kernel, SvmConfig, SvmModel};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SVM1";

pub fn encode(model: &SvmModel) -> Vec<u8> {
    let n = model.support_vectors.len();
    let d = model.dim();
    let mut out = Vec::with_capacity(70 + 8 * n * (d + 1));
    out.extend_from_slice(MAGIC);
    out.push(match model.config.kernel {
        Kernel::Rbf => 0,
        Kernel::Linear => 1,
    });
    for v in [model.config.gamma, model.config.c, model.config.tol] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(model.config.max_passes as u64).to_le_bytes());
    out.extend_from_slice(&model.negative_label.to_le_bytes());
    out.extend_from_slice(&model.positive_label.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(d as u64).to_le_bytes());
    out.extend_from_slice(&(model.iterations as u64).to_le_bytes());
    out.push(model.converged as u8);
    out.extend_from_slice(&model.bias.to_le_bytes());
    for a in &model.dual_coeffs {
        out.extend_from_slice(&a.to_le_bytes());
    }
    for sv in &model.support_vectors {
        for x in sv {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        if self.bytes.len() < N {
            return Err(Error::Data("truncated SVM blob".into()));
        }
        let (head, rest) = self.bytes.split_at(N);
        self.bytes = rest;
        Ok(head.try_into().unwrap())
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take()?))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }
}

pub fn decode(bytes: &[u8]) -> Result<SvmModel> {
    let mut r = Reader { bytes };
    if &r.take::<4>()? != MAGIC {
        return Err(Error::Data("not an SVM1 blob".into()));
    }
    let kernel = match r.u8()? {
        0 => Kernel::Rbf,
        1 => Kernel::Linear,
        t => return Err(Error::Data(format!("unknown kernel tag {t}"))),
    };
    let (gamma, c, tol) = (r.f64()?, r.f64()?, r.f64()?);
    let max_passes = r.u64()? as usize;
    let (negative_label, positive_label) = (r.i32()?, r.i32()?);
    let n = r.u64()? as usize;
    let d = r.u64()? as usize;
    let iterations = r.u64()? as usize;
    let converged = r.u8()? != 0;
    let bias = r.f64()?;
    let expected = n.checked_mul(d + 1).and_then(|x| x.checked_mul(8));
    if expected != Some(r.bytes.len()) {
        return Err(Error::Data(
            "SVM blob length does not match its counts".into(),
        ));
    }
    let dual_coeffs = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let support_vectors = (0..n)
        .map(|_| (0..d).map(|_| r.f64()).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(SvmModel {
        support_vectors,
        dual_coeffs,
        bias,
        config: SvmConfig {
            kernel,
            gamma,
            c,
            tol,
            max_passes,
        },
        negative_label,
        positive_label,
        iterations,
        converged,
    })
}
