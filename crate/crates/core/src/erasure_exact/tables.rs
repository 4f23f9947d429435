//! Output state of the bulk 3+3 -> 3 kernels for every pair of input states.
//!
//! Row `a - 1`, column `b - 1` holds the output state id when the odd child is
//! in state `a` and the even child in state `b`.

pub const TRIPLE_LEFT: [[u8; 16]; 16] = [
    [ 1,  1,  8,  4,  1,  1,  5,  1,  8,  4, 14,  5,  8,  4,  5, 14],
    [ 1,  2,  8,  4,  7,  6,  5,  3, 12, 10, 14,  9, 13, 11, 15, 16],
    [ 5,  5, 14, 14,  5,  5,  5,  5, 14, 14, 14,  5, 14, 14,  5, 14],
    [ 4,  4, 14,  4,  4,  4, 14,  4, 14,  4, 14, 14, 14,  4, 14, 14],
    [ 1,  3,  8,  4,  6,  7,  5,  2, 13, 11, 14,  9, 12, 10, 15, 16],
    [ 1,  6,  8,  4,  3,  2,  5,  7, 13, 10, 14, 15, 12, 11,  9, 16],
    [ 8,  8,  8, 14,  8,  8, 14,  8,  8, 14, 14, 14,  8, 14, 14, 14],
    [ 1,  7,  8,  4,  2,  3,  5,  6, 12, 11, 14, 15, 13, 10,  9, 16],
    [ 5,  9, 14, 14, 15, 15,  5,  9, 16, 16, 14,  9, 16, 16, 15, 16],
    [ 4, 10, 14,  4, 11, 10, 14, 11, 16, 10, 14, 16, 16, 11, 16, 16],
    [14, 14, 14, 14, 14, 14, 14, 14, 14, 14, 14, 14, 14, 14, 14, 14],
    [ 8, 12,  8, 14, 12, 13, 14, 13, 12, 16, 14, 16, 13, 16, 16, 16],
    [ 5, 15, 14, 14,  9,  9,  5, 15, 16, 16, 14, 15, 16, 16,  9, 16],
    [ 4, 11, 14,  4, 10, 11, 14, 10, 16, 11, 14, 16, 16, 10, 16, 16],
    [ 8, 13,  8, 14, 13, 12, 14, 12, 13, 16, 14, 16, 12, 16, 16, 16],
    [14, 16, 14, 14, 16, 16, 14, 16, 16, 16, 14, 16, 16, 16, 16, 16],
];

pub const TRIPLE_RIGHT: [[u8; 16]; 16] = [
    [ 1,  1,  1,  7,  1,  1,  1,  1,  1,  7,  7,  1,  1,  7,  1,  7],
    [ 1,  1,  1,  7,  5,  1,  1,  6,  5,  7,  7,  6,  6, 15,  5, 15],
    [ 1,  1,  3,  7,  1,  1,  4,  1,  3,  7, 11,  4,  3,  7,  4, 11],
    [ 7,  7,  7,  7,  7,  7,  7,  7,  7,  7,  7,  7,  7,  7,  7,  7],
    [ 1,  2,  1,  7,  1,  8,  1,  1,  2, 12,  7,  2,  8,  7,  8, 12],
    [ 1,  1,  1,  7,  6,  1,  1,  5,  6,  7,  7,  5,  5, 15,  6, 15],
    [ 1,  1,  4,  7,  1,  1,  3,  1,  4,  7, 11,  3,  4,  7,  3, 11],
    [ 1,  8,  1,  7,  1,  2,  1,  1,  8, 12,  7,  8,  2,  7,  2, 12],
    [ 1,  2,  3,  7,  5,  8,  4,  6,  9, 12, 11, 10, 13, 15, 14, 16],
    [ 7,  7,  7,  7, 15,  7,  7, 15, 15,  7,  7, 15, 15, 15, 15, 15],
    [ 7,  7, 11,  7,  7,  7, 11,  7, 11,  7, 11, 11, 11,  7, 11, 11],
    [ 1,  8,  4,  7,  5,  2,  3,  6, 14, 12, 11, 13, 10, 15,  9, 16],
    [ 1,  8,  3,  7,  6,  2,  4,  5, 13, 12, 11, 14,  9, 15, 10, 16],
    [ 7, 12,  7,  7,  7, 12,  7,  7, 12, 12,  7, 12, 12,  7, 12, 12],
    [ 1,  2,  4,  7,  6,  8,  3,  5, 10, 12, 11,  9, 14, 15, 13, 16],
    [ 7, 12, 11,  7, 15, 12, 11, 15, 16, 12, 11, 16, 16, 15, 16, 16],
];
