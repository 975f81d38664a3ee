//! Over-reserved output buffers.
//!
//! The buffer is allocated zeroed at an upper bound of the final size. Large
//! zeroed allocations are served by fresh anonymous mappings, so pages are
//! only backed by physical memory once they are written; the committed prefix
//! is all that is ever touched.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

pub struct ReservedBuffer<T> {
    data: Vec<T>,
    ptr: *mut T,
    cursor: AtomicUsize,
    committed: AtomicUsize,
}

// SAFETY: concurrent access only goes through `write_at`, whose contract
// requires callers to write disjoint ranges.
unsafe impl<T: Send> Send for ReservedBuffer<T> {}
unsafe impl<T: Send> Sync for ReservedBuffer<T> {}

impl<T: Copy + Default> ReservedBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        let mut data = vec![T::default(); capacity];
        let ptr = data.as_mut_ptr();
        Self { data, ptr, cursor: AtomicUsize::new(0), committed: AtomicUsize::new(0) }
    }

    /// Upper bound the buffer was reserved for.
    pub fn capacity(&self) -> usize {
        self.data.len()
    }

    /// One past the highest position written so far.
    pub fn committed_len(&self) -> usize {
        self.committed.load(Ordering::Acquire)
    }

    /// Bump-allocates `len` slots and returns their start.
    pub fn advance(&self, len: usize) -> Result<usize> {
        let start = self.cursor.fetch_add(len, Ordering::AcqRel);
        if start + len > self.capacity() {
            return Err(Error::Internal(format!(
                "reserved capacity {} exceeded (requested {}..{})",
                self.capacity(),
                start,
                start + len
            )));
        }
        Ok(start)
    }

    /// Copies `src` to `offset..offset + src.len()`.
    ///
    /// # Safety
    ///
    /// No other thread may write an overlapping range concurrently.
    pub unsafe fn write_at(&self, offset: usize, src: &[T]) -> Result<()> {
        let end = offset
            .checked_add(src.len())
            .filter(|&e| e <= self.capacity())
            .ok_or_else(|| {
                Error::Internal(format!(
                    "write of {} items at {offset} exceeds reserved capacity {}",
                    src.len(),
                    self.capacity()
                ))
            })?;
        std::ptr::copy_nonoverlapping(src.as_ptr(), self.ptr.add(offset), src.len());
        self.committed.fetch_max(end, Ordering::AcqRel);
        Ok(())
    }

    /// Releases the unused tail and returns the first `len` items.
    pub fn into_vec(mut self, len: usize) -> Result<Vec<T>> {
        if len > self.committed_len() {
            return Err(Error::Internal(format!(
                "requested {len} items but only {} were committed",
                self.committed_len()
            )));
        }
        let mut data = std::mem::take(&mut self.data);
        data.truncate(len);
        data.shrink_to_fit();
        Ok(data)
    }
}
