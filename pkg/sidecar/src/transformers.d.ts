// Minimal typings for the optional transformer runtime; installed
// separately (`npm install @huggingface/transformers`) when a real
// checkpoint backbone is wanted.
declare module '@huggingface/transformers' {
  export function pipeline(task: string, model?: string, options?: unknown): Promise<any>;
}
