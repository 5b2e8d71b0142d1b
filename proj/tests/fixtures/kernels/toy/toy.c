void toy(int a[4])
{
  for (int i = 0; i < 4; i++) {
    a[i] = a[i] + 1;
  }
}
