/// Error function `erf(x) = (2/√π) ∫_0^x e^{-t²} dt`.
///
/// Backed by the fdlibm rational approximations (via `libm`), accurate to
/// about one ulp on the whole real line.
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}
