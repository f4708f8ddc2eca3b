import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    testTimeout: 600_000,
    hookTimeout: 120_000,
    // archive-heavy parity tests share temp state; keep them sequential
    pool: "forks",
    poolOptions: { forks: { singleFork: true } },
  },
});
