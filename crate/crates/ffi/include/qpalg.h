#ifndef QPALG_H
#define QPALG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define QPALG_OK 0

#define QPALG_ERR_VERIFY 1

#define QPALG_ERR_PARSE 2

#define QPALG_ERR_PRECONDITION 3

#define QPALG_ERR_ARGUMENT 4

/**
 * Opaque handle to a parsed value (symbol, operator, trigonometric
 * polynomial, circle operator, or rational constant).
 */
typedef struct QpalgValue QpalgValue;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent error on this thread. The pointer is
 * owned by the library and stays valid until the next failing call.
 */
const char *qpalg_last_error(void);

/**
 * Parse an expression. `n_hint` forces a minimum dimension (pass 0 to infer
 * it from the variable indices). On success writes a fresh handle to `out`.
 */
int32_t qpalg_parse(const char *src, uintptr_t n_hint, struct QpalgValue **out);

/**
 * Release a value handle. Null is ignored.
 */
void qpalg_value_free(struct QpalgValue *v);

/**
 * Canonical text form of a value. Release with `qpalg_string_free`.
 */
char *qpalg_value_to_string(const struct QpalgValue *v);

/**
 * Release a string returned by the library. Null is ignored.
 */
void qpalg_string_free(char *s);

/**
 * Operator composition (differential or circle operators).
 */
int32_t qpalg_compose(const struct QpalgValue *a,
                      const struct QpalgValue *b,
                      struct QpalgValue **out);

/**
 * Operator commutator (differential or circle operators).
 */
int32_t qpalg_bracket(const struct QpalgValue *a,
                      const struct QpalgValue *b,
                      struct QpalgValue **out);

/**
 * Poisson bracket of two symbols.
 */
int32_t qpalg_poisson(const struct QpalgValue *a,
                      const struct QpalgValue *b,
                      struct QpalgValue **out);

/**
 * Full affine symbol of a differential operator.
 */
int32_t qpalg_symbol(const struct QpalgValue *v, struct QpalgValue **out);

/**
 * Normal-ordering quantization of a symbol.
 */
int32_t qpalg_quantize(const struct QpalgValue *v, struct QpalgValue **out);

/**
 * Apply an operator to a polynomial.
 */
int32_t qpalg_apply(const struct QpalgValue *op,
                    const struct QpalgValue *arg,
                    struct QpalgValue **out);

/**
 * Star product of two symbols truncated to `order` powers of hbar, as a
 * newline-separated coefficient list. Release with `qpalg_string_free`;
 * returns null on error (see `qpalg_last_error`).
 */
char *qpalg_star(const struct QpalgValue *a, const struct QpalgValue *b, uintptr_t order);

/**
 * Run a named verification suite, or all of them when `suite` is "all".
 * Returns 0 when every suite passes, 1 on a verification failure, 3 for an
 * unknown suite name.
 */
int32_t qpalg_verify(const char *suite, uint64_t seed);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* QPALG_H */
