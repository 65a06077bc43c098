//! C ABI surface for the commact toolkit. Placeholder; see build notes.
