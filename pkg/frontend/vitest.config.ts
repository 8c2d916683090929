import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
    testTimeout: 30_000,
    hookTimeout: 80_000,
    // The e2e suite owns a real server process; keep files sequential.
    fileParallelism: false,
  },
});
