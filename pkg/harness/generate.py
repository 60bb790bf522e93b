#!/usr/bin/env python3
"""Generate a measurement harness for one emitted kernel.

Reads the kernel's generated header (the calling contract comment lists
every parameter as ``name: RxC iotype``), and writes a single C99
translation unit implementing:

    ./harness <inputs.bin> <outputs.bin> <reps>

Protocol: one warm-up call, then reps timed calls; one ``CYCLES <i>
<count>`` line per repetition, then ``DONE <median>``; outputs written
once after the final call.  Exit status 0 on success, 3 on an operand
file format mismatch.

Usage: generate.py <kernel.h> <out.c>
"""

import re
import sys

CONTRACT_RE = re.compile(r"^\s*\*\s+(\w+): (\d+)x(\d+) (In|Out|InOut)\s*$")
PROTO_RE = re.compile(r"^void (\w+)\(")


def parse_header(path):
    name = None
    params = []
    with open(path) as f:
        for line in f:
            m = CONTRACT_RE.match(line)
            if m:
                params.append((m.group(1), int(m.group(2)),
                               int(m.group(3)), m.group(4)))
                continue
            m = PROTO_RE.match(line)
            if m:
                name = m.group(1)
    if name is None or not params:
        raise SystemExit(f"no kernel contract found in {path}")
    return name, params


TEMPLATE = r"""/* measurement harness for {kernel} (generated; do not edit) */
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "{header}"

#define EXIT_FORMAT 3
#define MAGIC "SLGNOP01"

{decls}

static const struct operand {{
    const char *name;
    uint32_t rows, cols;
    double *buf;      /* working buffer passed to the kernel */
    double *pristine; /* input snapshot restored before every call */
    int is_in, is_out;
}} operands[] = {{
{table}
}};
enum {{ NOPERANDS = {count} }};

#if defined(__x86_64__) || defined(__i386__)
static uint64_t cycles_now(void) {{
    uint32_t lo, hi;
    /* cpuid serializes, rdtsc reads the timestamp counter */
    __asm__ __volatile__("cpuid\n\trdtsc"
                         : "=a"(lo), "=d"(hi)
                         :: "%rbx", "%rcx", "memory");
    return ((uint64_t)hi << 32) | lo;
}}
#else
#include <time.h>
static uint64_t cycles_now(void) {{
    struct timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return (uint64_t)ts.tv_sec * 1000000000u + (uint64_t)ts.tv_nsec;
}}
#endif

static uint32_t rd_u32(const unsigned char *p) {{
    return (uint32_t)p[0] | ((uint32_t)p[1] << 8)
         | ((uint32_t)p[2] << 16) | ((uint32_t)p[3] << 24);
}}

static void wr_u32(FILE *f, uint32_t v) {{
    unsigned char p[4] = {{ (unsigned char)(v & 0xff),
                            (unsigned char)((v >> 8) & 0xff),
                            (unsigned char)((v >> 16) & 0xff),
                            (unsigned char)((v >> 24) & 0xff) }};
    fwrite(p, 1, 4, f);
}}

static int load_inputs(const char *path) {{
    FILE *f = fopen(path, "rb");
    if (!f) return -1;
    fseek(f, 0, SEEK_END);
    long size = ftell(f);
    fseek(f, 0, SEEK_SET);
    if (size < 12) {{ fclose(f); return -1; }}
    unsigned char *data = malloc((size_t)size);
    if (!data || fread(data, 1, (size_t)size, f) != (size_t)size) {{
        free(data); fclose(f); return -1;
    }}
    fclose(f);
    if (memcmp(data, MAGIC, 8) != 0) {{ free(data); return -1; }}
    long off = 8;
    uint32_t count = rd_u32(data + off); off += 4;
    /* header pass: record name, dims, payload order */
    struct head {{ char name[256]; uint32_t rows, cols; }} *heads =
        calloc(count, sizeof *heads);
    for (uint32_t k = 0; k < count; k++) {{
        if (off + 4 > size) goto bad;
        uint32_t nlen = rd_u32(data + off); off += 4;
        if (nlen >= sizeof heads[k].name || off + (long)nlen > size)
            goto bad;
        memcpy(heads[k].name, data + off, nlen); off += nlen;
        if (off + 8 > size) goto bad;
        heads[k].rows = rd_u32(data + off); off += 4;
        heads[k].cols = rd_u32(data + off); off += 4;
    }}
    /* payload pass */
    int provided[NOPERANDS] = {{0}};
    for (uint32_t k = 0; k < count; k++) {{
        long nbytes = (long)heads[k].rows * heads[k].cols * 8;
        if (off + nbytes > size) goto bad;
        for (int i = 0; i < NOPERANDS; i++) {{
            if (strcmp(operands[i].name, heads[k].name) != 0)
                continue;
            if (operands[i].rows != heads[k].rows
                || operands[i].cols != heads[k].cols)
                goto bad;
            memcpy(operands[i].pristine, data + off, (size_t)nbytes);
            provided[i] = 1;
        }}
        off += nbytes;
    }}
    if (off != size) goto bad;
    for (int i = 0; i < NOPERANDS; i++)
        if (operands[i].is_in && !provided[i]) goto bad;
    free(heads);
    free(data);
    return 0;
bad:
    free(heads);
    free(data);
    return -1;
}}

static void restore_inputs(void) {{
    for (int i = 0; i < NOPERANDS; i++) {{
        size_t n = (size_t)operands[i].rows * operands[i].cols;
        memcpy(operands[i].buf, operands[i].pristine, n * sizeof(double));
    }}
}}

static int dump_outputs(const char *path) {{
    FILE *f = fopen(path, "wb");
    if (!f) return -1;
    uint32_t nout = 0;
    for (int i = 0; i < NOPERANDS; i++)
        if (operands[i].is_out) nout++;
    fwrite(MAGIC, 1, 8, f);
    wr_u32(f, nout);
    for (int i = 0; i < NOPERANDS; i++) {{
        if (!operands[i].is_out) continue;
        uint32_t nlen = (uint32_t)strlen(operands[i].name);
        wr_u32(f, nlen);
        fwrite(operands[i].name, 1, nlen, f);
        wr_u32(f, operands[i].rows);
        wr_u32(f, operands[i].cols);
    }}
    for (int i = 0; i < NOPERANDS; i++) {{
        if (!operands[i].is_out) continue;
        size_t n = (size_t)operands[i].rows * operands[i].cols;
        fwrite(operands[i].buf, sizeof(double), n, f);
    }}
    fclose(f);
    return 0;
}}

static int cmp_u64(const void *a, const void *b) {{
    uint64_t x = *(const uint64_t *)a, y = *(const uint64_t *)b;
    return x < y ? -1 : x > y ? 1 : 0;
}}

int main(int argc, char **argv) {{
    if (argc != 4) {{
        fprintf(stderr,
                "usage: %s <inputs.bin> <outputs.bin> <reps>\n", argv[0]);
        return 2;
    }}
    long reps = strtol(argv[3], NULL, 10);
    if (reps < 1) {{
        fprintf(stderr, "reps must be >= 1\n");
        return 2;
    }}
    if (load_inputs(argv[1]) != 0) {{
        fprintf(stderr, "input file format mismatch\n");
        return EXIT_FORMAT;
    }}
    uint64_t *cycles = malloc((size_t)reps * sizeof(uint64_t));
    if (!cycles) return 2;

    restore_inputs();
    {call}; /* warm-up */

    for (long r = 0; r < reps; r++) {{
        restore_inputs();
        uint64_t t0 = cycles_now();
        {call};
        uint64_t t1 = cycles_now();
        cycles[r] = t1 - t0;
    }}
    for (long r = 0; r < reps; r++)
        printf("CYCLES %ld %llu\n", r, (unsigned long long)cycles[r]);

    qsort(cycles, (size_t)reps, sizeof(uint64_t), cmp_u64);
    double median = (reps % 2)
        ? (double)cycles[reps / 2]
        : ((double)cycles[reps / 2 - 1] + (double)cycles[reps / 2]) / 2.0;
    printf("DONE %.1f\n", median);

    if (dump_outputs(argv[2]) != 0) {{
        fprintf(stderr, "cannot write outputs\n");
        return 2;
    }}
    free(cycles);
    return 0;
}}
"""


def generate(header_path, out_path):
    name, params = parse_header(header_path)
    decls = []
    table = []
    for (pname, rows, cols, iotype) in params:
        size = rows * cols
        decls.append(f"static double buf_{pname}[{size}];")
        decls.append(f"static double pristine_{pname}[{size}];")
        is_in = int(iotype in ("In", "InOut"))
        is_out = int(iotype in ("Out", "InOut"))
        table.append(f'    {{ "{pname}", {rows}, {cols}, buf_{pname}, '
                     f"pristine_{pname}, {is_in}, {is_out} }},")
    args = ", ".join(f"buf_{p[0]}" for p in params)
    header = header_path.replace("\\", "/").rsplit("/", 1)[-1]
    text = TEMPLATE.format(kernel=name, header=header,
                           decls="\n".join(decls),
                           table="\n".join(table),
                           count=len(params),
                           call=f"{name}({args})")
    with open(out_path, "w") as f:
        f.write(text)


if __name__ == "__main__":
    if len(sys.argv) != 3:
        raise SystemExit(__doc__)
    generate(sys.argv[1], sys.argv[2])
