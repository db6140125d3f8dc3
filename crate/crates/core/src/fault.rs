//! Deliberate corruption of the monomial derivative, used to check that the
//! gradient checker notices broken backprop. Only available with the
//! `fault-injection` feature; otherwise every switch reports itself
//! unsupported and the hot path compiles to a constant.

use crate::error::Result;

#[cfg(feature = "fault-injection")]
static SIGN_FLIP: std::sync::atomic::AtomicBool = std::sync::atomic::AtomicBool::new(false);

/// Makes every monomial derivative return its negation.
pub fn enable_sign_flip() -> Result<()> {
    #[cfg(feature = "fault-injection")]
    {
        SIGN_FLIP.store(true, std::sync::atomic::Ordering::SeqCst);
        Ok(())
    }
    #[cfg(not(feature = "fault-injection"))]
    {
        Err(crate::error::Error::config(
            "fault injection requires the `fault-injection` feature",
        ))
    }
}

pub fn disable_sign_flip() {
    #[cfg(feature = "fault-injection")]
    SIGN_FLIP.store(false, std::sync::atomic::Ordering::SeqCst);
}

#[inline]
pub(crate) fn sign_flip_active() -> bool {
    #[cfg(feature = "fault-injection")]
    {
        SIGN_FLIP.load(std::sync::atomic::Ordering::Relaxed)
    }
    #[cfg(not(feature = "fault-injection"))]
    {
        false
    }
}
