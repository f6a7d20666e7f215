/* Shared startup for the bundled microbenchmarks.
 *
 * Each benchmark defines ITERATIONS, bench_init and bench_run. bench_run
 * receives the iteration count in a0 and returns a checksum in a0. The
 * harness reads three lines from the UART:
 *   ITERS 0x...   CYCLES 0x...   CHECK 0x...
 * CYCLES is measured by the benchmark itself through the cycle CSR. */

#if __riscv_xlen == 64
#define LREG ld
#define SREG sd
#define REGBYTES 8
#else
#define LREG lw
#define SREG sw
#define REGBYTES 4
#endif

#ifdef __riscv_mul
#define MUL_A0_A1 mul a0, a0, a1
#define DIVU_A0_A1 remu t0, a0, a1; divu a0, a0, a1; mv a1, t0
#else
#define MUL_A0_A1 call soft_mul
#define DIVU_A0_A1 call soft_divu
#endif

#define MMIO_BASE 0x10000000
#define STACK_TOP 0x20000

    .section .text.start, "ax"
    .globl _start
_start:
    li sp, STACK_TOP
    la t0, trap_handler
    csrw mtvec, t0
    call bench_init
    li a0, ITERATIONS
    csrr s2, cycle
    call bench_run
    csrr s3, cycle
    mv s4, a0
    sub s3, s3, s2

    la a0, str_iters
    call puts
    li a0, ITERATIONS
    call puthex
    la a0, str_cycles
    call puts
    mv a0, s3
    call puthex
    la a0, str_check
    call puts
    mv a0, s4
    call puthex

    li t0, MMIO_BASE
    sw zero, 8(t0)
1:  j 1b

    .p2align 2
trap_handler:
    li t0, MMIO_BASE
    li t1, 0xee
    sw t1, 8(t0)
    j trap_handler

/* puts(a0 = nul-terminated string) */
puts:
    li t0, MMIO_BASE
1:  lbu t1, 0(a0)
    beqz t1, 2f
    sb t1, 0(t0)
    addi a0, a0, 1
    j 1b
2:  ret

/* puthex(a0): "0x" followed by XLEN/4 hex digits and a newline */
puthex:
    li t0, MMIO_BASE
    li t1, '0'
    sb t1, 0(t0)
    li t1, 'x'
    sb t1, 0(t0)
    li t2, __riscv_xlen - 4
1:  srl t1, a0, t2
    andi t1, t1, 15
    addi t3, t1, -10
    bltz t3, 2f
    addi t1, t1, 'a' - '0' - 10
2:  addi t1, t1, '0'
    sb t1, 0(t0)
    addi t2, t2, -4
    bgez t2, 1b
    li t1, '\n'
    sb t1, 0(t0)
    ret

#ifndef __riscv_mul
/* a0 * a1 -> a0, shift-and-add */
soft_mul:
    mv t0, a0
    li a0, 0
1:  andi t1, a1, 1
    beqz t1, 2f
    add a0, a0, t0
2:  slli t0, t0, 1
    srli a1, a1, 1
    bnez a1, 1b
    ret

/* a0 / a1 -> quotient a0, remainder a1 (unsigned, a1 != 0), restoring */
soft_divu:
    li t0, 0
    li t1, __riscv_xlen
1:  srli t3, a0, __riscv_xlen - 1
    slli t0, t0, 1
    or t0, t0, t3
    slli a0, a0, 1
    bltu t0, a1, 2f
    sub t0, t0, a1
    ori a0, a0, 1
2:  addi t1, t1, -1
    bnez t1, 1b
    mv a1, t0
    ret
#endif

    .section .rodata
str_iters:  .asciz "ITERS "
str_cycles: .asciz "CYCLES "
str_check:  .asciz "CHECK "

    .text
