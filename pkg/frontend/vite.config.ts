import { defineConfig } from "vite";

export default defineConfig({
  build: { outDir: "dist", sourcemap: true },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
  },
});
